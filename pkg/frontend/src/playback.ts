/**
 * Frame playback clock. The displayed index follows wall time at the
 * nominal frame rate, advances monotonically, and catches up after a slow
 * tick by skipping at most one frame per tick. Frames ahead of the play
 * head are prefetched so the cadence survives network hiccups.
 */

export interface FramePrefetcher {
  /** Ask for a frame to be ready soon; must be idempotent. */
  ensure(frameIndex: number): void;
}

export interface PlaybackOptions {
  frameCount: number;
  frameRate: number;
  now: () => number; // milliseconds
  prefetcher?: FramePrefetcher;
  prefetchAhead?: number;
}

export class Playback {
  private frameCount: number;
  private intervalMs: number;
  private now: () => number;
  private prefetcher?: FramePrefetcher;
  private prefetchAhead: number;

  private startedAt: number | null = null;
  private pausedAt: number | null = null;
  private pausedTotal = 0;
  private current = 0;

  constructor(options: PlaybackOptions) {
    this.frameCount = options.frameCount;
    this.intervalMs = 1000 / options.frameRate;
    this.now = options.now;
    this.prefetcher = options.prefetcher;
    this.prefetchAhead = options.prefetchAhead ?? 10;
  }

  start(): void {
    this.startedAt = this.now();
    this.pausedTotal = 0;
    this.pausedAt = null;
    this.current = 0;
    this.requestPrefetch();
  }

  get started(): boolean {
    return this.startedAt !== null;
  }

  get paused(): boolean {
    return this.pausedAt !== null;
  }

  pause(): void {
    if (this.startedAt !== null && this.pausedAt === null) {
      this.pausedAt = this.now();
    }
  }

  resume(): void {
    if (this.pausedAt !== null) {
      this.pausedTotal += this.now() - this.pausedAt;
      this.pausedAt = null;
    }
  }

  /** Milliseconds of actual playback, pauses excluded. */
  elapsedMs(): number {
    if (this.startedAt === null) return 0;
    const until = this.pausedAt ?? this.now();
    return until - this.startedAt - this.pausedTotal;
  }

  durationMs(): number {
    return this.frameCount * this.intervalMs;
  }

  remainingMs(): number {
    return Math.max(0, this.durationMs() - this.elapsedMs());
  }

  finished(): boolean {
    return this.startedAt !== null && this.elapsedMs() >= this.durationMs();
  }

  /** The frame currently on screen; what clicks are attributed to. */
  displayedIndex(): number {
    return this.current;
  }

  /**
   * Advance toward the wall-time target. Called once per render tick;
   * never moves backward and never skips more than one frame at a time.
   */
  tick(): number {
    if (this.startedAt === null || this.pausedAt !== null) {
      return this.current;
    }
    const target = Math.min(
      this.frameCount - 1,
      Math.max(0, Math.floor(this.elapsedMs() / this.intervalMs)),
    );
    if (target > this.current) {
      this.current = Math.min(target, this.current + 2);
    }
    this.requestPrefetch();
    return this.current;
  }

  private requestPrefetch(): void {
    if (!this.prefetcher) return;
    const last = Math.min(this.frameCount - 1, this.current + this.prefetchAhead);
    for (let i = this.current; i <= last; i++) {
      this.prefetcher.ensure(i);
    }
  }
}

/** Frame image cache that fetches ahead of the play head. */
export class FrameStore implements FramePrefetcher {
  private images = new Map<number, HTMLImageElement>();

  constructor(private urlFor: (frameIndex: number) => string) {}

  ensure(frameIndex: number): void {
    if (this.images.has(frameIndex)) return;
    const img = new Image();
    img.src = this.urlFor(frameIndex);
    this.images.set(frameIndex, img);
  }

  get(frameIndex: number): HTMLImageElement | undefined {
    const img = this.images.get(frameIndex);
    return img && img.complete && img.naturalWidth > 0 ? img : undefined;
  }
}
