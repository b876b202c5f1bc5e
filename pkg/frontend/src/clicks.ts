/**
 * Click capture and delivery. Each accepted click is stamped with the
 * frame displayed at pointer-down and a client-generated id, then posted
 * in order. Server errors keep the click queued and retry with the same
 * id (the server deduplicates); 4xx rejections drop the click and surface
 * a visual cue. Nothing is ever lost silently.
 */

import { ApiError, ClickResult, GameApi } from "./api.js";

export interface PendingClick {
  id: string;
  frame: number;
  x: number;
  y: number;
}

export interface ClickQueueEvents {
  /** Server scored the click; score is authoritative. */
  onResult(click: PendingClick, result: ClickResult): void;
  /** Server rejected the click (4xx); it will not be retried. */
  onRejected(click: PendingClick, status: number): void;
  /** Transient failure; the queue pauses and will retry. */
  onRetryScheduled(click: PendingClick, attempt: number): void;
}

export interface ClickQueueOptions {
  api: GameApi;
  sessionToken: string;
  events: ClickQueueEvents;
  retryDelayMs?: number;
  schedule?: (fn: () => void, delayMs: number) => void;
  idPrefix?: string;
}

export class ClickQueue {
  private api: GameApi;
  private sessionToken: string;
  private events: ClickQueueEvents;
  private retryDelayMs: number;
  private schedule: (fn: () => void, delayMs: number) => void;
  private idPrefix: string;

  private queue: PendingClick[] = [];
  private counter = 0;
  private inFlight = false;
  private attempt = 0;

  constructor(options: ClickQueueOptions) {
    this.api = options.api;
    this.sessionToken = options.sessionToken;
    this.events = options.events;
    this.retryDelayMs = options.retryDelayMs ?? 500;
    this.schedule = options.schedule ?? ((fn, delay) => setTimeout(fn, delay));
    this.idPrefix = options.idPrefix ?? Math.random().toString(36).slice(2, 10);
  }

  get pending(): number {
    return this.queue.length + (this.inFlight ? 1 : 0);
  }

  /** Accept a click for the given displayed frame; returns its id. */
  submit(frame: number, x: number, y: number): string {
    const id = `${this.idPrefix}-${this.counter++}`;
    this.queue.push({ id, frame, x, y });
    void this.pump();
    return id;
  }

  private async pump(): Promise<void> {
    if (this.inFlight) return;
    const click = this.queue.shift();
    if (!click) return;
    this.inFlight = true;
    try {
      const result = await this.api.postClick(
        this.sessionToken,
        click.frame,
        click.x,
        click.y,
        click.id,
      );
      this.attempt = 0;
      this.events.onResult(click, result);
      this.inFlight = false;
      void this.pump();
    } catch (err) {
      if (err instanceof ApiError && err.status >= 400 && err.status < 500) {
        this.attempt = 0;
        this.events.onRejected(click, err.status);
        this.inFlight = false;
        void this.pump();
        return;
      }
      // Transient: retry the same click (same id; server deduplicates).
      this.attempt += 1;
      this.queue.unshift(click);
      this.events.onRetryScheduled(click, this.attempt);
      this.schedule(() => {
        this.inFlight = false;
        void this.pump();
      }, this.retryDelayMs);
    }
  }
}
