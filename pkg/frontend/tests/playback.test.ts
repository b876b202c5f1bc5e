import { describe, expect, it } from "vitest";

import { Playback } from "../src/playback.js";

/** Deterministic fake clock the engine polls. */
class Clock {
  t = 0;
  now = () => this.t;
  advance(ms: number) {
    this.t += ms;
  }
}

describe("playback timing", () => {
  it("attributes 1000 synthetic pointer events within +-1 frame", () => {
    // Ticks arrive with a jittery render budget of up to 100 ms; pointer
    // events land at arbitrary moments between ticks. The frame the engine
    // reports must be within one frame of the ideal index at event time.
    const clock = new Clock();
    const frameRate = 10;
    const playback = new Playback({ frameCount: 100000, frameRate, now: clock.now });
    playback.start();

    let rng = 42;
    const rand = () => {
      // xorshift; deterministic across runs
      rng ^= rng << 13;
      rng ^= rng >>> 17;
      rng ^= rng << 5;
      return (rng >>> 0) / 2 ** 32;
    };

    let good = 0;
    const total = 1000;
    for (let i = 0; i < total; i++) {
      // a few render ticks with jitter, then a pointer event
      const ticks = 1 + Math.floor(rand() * 3);
      for (let k = 0; k < ticks; k++) {
        clock.advance(5 + rand() * 95); // <=100 ms render budget
        playback.tick();
      }
      clock.advance(rand() * 30); // pointer fires between ticks
      const attributed = playback.displayedIndex();
      const ideal = Math.floor((clock.t / 1000) * frameRate);
      if (Math.abs(attributed - ideal) <= 1) good++;
    }
    expect(good / total).toBeGreaterThanOrEqual(0.99);
  });

  it("advances monotonically and never skips more than one frame per tick", () => {
    const clock = new Clock();
    const playback = new Playback({ frameCount: 600, frameRate: 10, now: clock.now });
    playback.start();
    let prev = 0;
    let rng = 7;
    for (let i = 0; i < 500; i++) {
      rng = (rng * 1103515245 + 12345) & 0x7fffffff;
      clock.advance(20 + (rng % 300)); // includes pathological stalls
      const idx = playback.tick();
      expect(idx).toBeGreaterThanOrEqual(prev);
      expect(idx - prev).toBeLessThanOrEqual(2); // at most one frame skipped
      prev = idx;
    }
  });

  it("a 300-frame level at 10 fps lasts 30 s within half a second", () => {
    const clock = new Clock();
    const playback = new Playback({ frameCount: 300, frameRate: 10, now: clock.now });
    playback.start();
    let elapsed = 0;
    while (!playback.finished()) {
      clock.advance(16); // typical display tick
      playback.tick();
      elapsed = clock.t;
      expect(elapsed).toBeLessThan(40_000); // safety
    }
    expect(elapsed).toBeGreaterThanOrEqual(29_500);
    expect(elapsed).toBeLessThanOrEqual(30_500);
  });

  it("pauses exclude time from playback and clicks resume where they left off", () => {
    const clock = new Clock();
    const playback = new Playback({ frameCount: 100, frameRate: 10, now: clock.now });
    playback.start();
    clock.advance(1000);
    playback.tick();
    playback.tick(); // catch up (two frames per tick at most)
    for (let i = 0; i < 20; i++) playback.tick();
    const before = playback.displayedIndex();
    playback.pause();
    clock.advance(5000);
    playback.tick();
    expect(playback.displayedIndex()).toBe(before);
    playback.resume();
    clock.advance(100);
    playback.tick();
    expect(playback.displayedIndex()).toBe(before + 1);
  });

  it("prefetches the next ten frames past the play head", () => {
    const requested = new Set<number>();
    const clock = new Clock();
    const playback = new Playback({
      frameCount: 50,
      frameRate: 10,
      now: clock.now,
      prefetcher: { ensure: (i) => requested.add(i) },
    });
    playback.start();
    for (let i = 0; i <= 10; i++) expect(requested.has(i)).toBe(true);
    expect(requested.has(11)).toBe(false);
    clock.advance(100);
    playback.tick();
    expect(requested.has(11)).toBe(true);
  });
});
