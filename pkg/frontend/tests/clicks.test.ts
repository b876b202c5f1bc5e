import { describe, expect, it } from "vitest";

import { GameApi } from "../src/api.js";
import { ClickQueue, PendingClick } from "../src/clicks.js";

interface Call {
  url: string;
  body: Record<string, unknown>;
}

/** Fake service: scripted status codes, records every POST body. */
function fakeApi(statuses: number[]) {
  const calls: Call[] = [];
  let i = 0;
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const body = init?.body ? JSON.parse(init.body as string) : {};
    calls.push({ url, body });
    const status = statuses[Math.min(i++, statuses.length - 1)];
    if (status === 0) throw new TypeError("network down");
    const payload =
      status === 200
        ? { delta: 10, score: 10 * calls.length, hit: true }
        : { error: `status ${status}` };
    return new Response(JSON.stringify(payload), { status });
  };
  return { calls, api: new GameApi("/api/v1", fetchFn) };
}

function collector() {
  const results: { click: PendingClick; score: number }[] = [];
  const rejected: { click: PendingClick; status: number }[] = [];
  const retries: number[] = [];
  const pendingTimers: (() => void)[] = [];
  return {
    results,
    rejected,
    retries,
    pendingTimers,
    events: {
      onResult: (click: PendingClick, r: { score: number }) =>
        results.push({ click, score: r.score }),
      onRejected: (click: PendingClick, status: number) =>
        rejected.push({ click, status }),
      onRetryScheduled: (_click: PendingClick, attempt: number) =>
        retries.push(attempt),
    },
    schedule: (fn: () => void) => pendingTimers.push(fn),
    async flush() {
      while (pendingTimers.length) {
        pendingTimers.shift()!();
        await settle();
      }
    },
  };
}

// Response.json() reads a body stream, so draining the queue needs real
// macrotask turns, not just resolved microtasks.
const settle = async () => {
  for (let i = 0; i < 10; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
};

describe("click queue", () => {
  it("each accepted click produces exactly one POST with its own id", async () => {
    const { calls, api } = fakeApi([200]);
    const c = collector();
    const q = new ClickQueue({ api, sessionToken: "tok", events: c.events, schedule: c.schedule });
    q.submit(3, 10, 20);
    q.submit(3, 11, 21);
    q.submit(4, 12, 22);
    await settle();
    expect(calls.length).toBe(3);
    const ids = calls.map((call) => call.body.click_id);
    expect(new Set(ids).size).toBe(3);
    expect(calls.map((call) => call.body.frame)).toEqual([3, 3, 4]);
    expect(c.results.length).toBe(3);
  });

  it("retries transient failures with the same click id", async () => {
    const { calls, api } = fakeApi([0, 503, 200]);
    const c = collector();
    const q = new ClickQueue({ api, sessionToken: "tok", events: c.events, schedule: c.schedule });
    q.submit(5, 1, 2);
    await settle();
    await c.flush();
    await c.flush();
    expect(calls.length).toBe(3);
    expect(new Set(calls.map((call) => call.body.click_id)).size).toBe(1);
    expect(c.retries).toEqual([1, 2]);
    expect(c.results.length).toBe(1); // delivered exactly once in the end
  });

  it("4xx rejections drop the click with a visual cue and do not retry", async () => {
    const { calls, api } = fakeApi([400, 200]);
    const c = collector();
    const q = new ClickQueue({ api, sessionToken: "tok", events: c.events, schedule: c.schedule });
    q.submit(0, 999, 0); // out of bounds
    q.submit(0, 5, 5);
    await settle();
    expect(c.rejected.length).toBe(1);
    expect(c.rejected[0].status).toBe(400);
    expect(c.results.length).toBe(1);
    expect(calls.length).toBe(2); // no retry of the rejected click
  });

  it("keeps click order even across retries", async () => {
    const { calls, api } = fakeApi([0, 200]);
    const c = collector();
    const q = new ClickQueue({ api, sessionToken: "tok", events: c.events, schedule: c.schedule });
    q.submit(1, 1, 1);
    q.submit(2, 2, 2);
    await settle();
    await c.flush();
    expect(calls.map((call) => call.body.frame)).toEqual([1, 1, 2]);
    expect(c.results.map((r) => r.click.frame)).toEqual([1, 2]);
  });

  it("the served score is authoritative for the HUD", async () => {
    const { api } = fakeApi([200]);
    const c = collector();
    const q = new ClickQueue({ api, sessionToken: "tok", events: c.events, schedule: c.schedule });
    q.submit(1, 1, 1);
    q.submit(1, 2, 2);
    await settle();
    // fake service returns score = 10 * number of calls so far
    expect(c.results.map((r) => r.score)).toEqual([10, 20]);
  });
});
