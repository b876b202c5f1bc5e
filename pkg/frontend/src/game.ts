/**
 * One level of play: open a session, run the 10 fps playback loop, send
 * clicks as they happen, and report the pass/fail result when the timer
 * runs out. Scoring is entirely server-side; the client only displays
 * what it is told.
 */

import { GameApi, LevelDescriptor, LevelResult } from "./api.js";
import { ClickQueue } from "./clicks.js";
import { HudState } from "./hud.js";
import { FrameStore, Playback } from "./playback.js";

export interface LevelSession {
  playback: Playback;
  hud: HudState;
  clicks: ClickQueue;
  frames: FrameStore;
  level: LevelDescriptor;
  finish(): Promise<LevelResult>;
  pointerDown(x: number, y: number): void;
  pointerMove(x: number, y: number): void;
}

export async function startLevel(
  api: GameApi,
  level: LevelDescriptor,
  user: string,
  now: () => number = () => performance.now(),
): Promise<LevelSession> {
  const session = await api.openSession(user, level.id);
  const frames = new FrameStore((i) => api.frameUrl(level.id, i, session.token));
  const playback = new Playback({
    frameCount: level.frames,
    frameRate: level.frame_rate,
    now,
    prefetcher: frames,
  });
  const hud = new HudState(level.required_points);

  const clicks = new ClickQueue({
    api,
    sessionToken: session.token,
    events: {
      onResult(click, result) {
        hud.applyClickResult(result.delta, result.score, click.x, click.y);
        if (hud.banner === "connection lost, retrying...") {
          hud.banner = null;
          playback.resume();
        }
      },
      onRejected() {
        hud.rejectClick();
      },
      onRetryScheduled() {
        // No silent click loss: pause playback and say so.
        hud.banner = "connection lost, retrying...";
        playback.pause();
      },
    },
  });

  let completed: Promise<LevelResult> | null = null;
  const finish = (): Promise<LevelResult> => {
    if (!completed) {
      completed = api.completeLevel(level.id, session.token).then((result) => {
        hud.finish(result);
        return result;
      });
    }
    return completed;
  };

  return {
    playback,
    hud,
    clicks,
    frames,
    level,
    finish,
    pointerDown(x: number, y: number) {
      if (!playback.started || playback.paused || playback.finished()) {
        return; // clicks during pause are ignored locally, nothing posted
      }
      clicks.submit(playback.displayedIndex(), Math.round(x), Math.round(y));
    },
    pointerMove(x: number, y: number) {
      hud.crosshair = { x, y };
    },
  };
}
