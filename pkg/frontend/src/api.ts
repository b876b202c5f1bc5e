/**
 * Typed client for the game service under /api/v1.
 * The fetch function is injectable so tests can run without a server.
 */

export interface LevelDescriptor {
  id: string;
  index: number;
  frames: number;
  width: number;
  height: number;
  frame_rate: number;
  required_points: number;
}

export interface SessionInfo {
  token: string;
  user: string;
  level: string;
  expires_at: number;
}

export interface ClickResult {
  delta: number;
  score: number;
  hit: boolean;
}

export interface LevelResult {
  passed: boolean;
  required: number;
  achieved: number;
}

export interface LeaderboardRow {
  user: string;
  best_score: number;
  games_played: number;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Error carrying the HTTP status so callers can tell 4xx from 5xx. */
export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class GameApi {
  constructor(
    private base: string = "/api/v1",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { error?: string };
        if (body.error) detail = body.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  listLevels(sessionToken?: string): Promise<LevelDescriptor[]> {
    const query = sessionToken ? `?session=${encodeURIComponent(sessionToken)}` : "";
    return this.json<LevelDescriptor[]>(`/levels${query}`);
  }

  openSession(user: string, level: string): Promise<SessionInfo> {
    return this.json<SessionInfo>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ user, level }),
    });
  }

  frameUrl(levelId: string, frameIndex: number, sessionToken: string): string {
    return (
      `${this.base}/levels/${encodeURIComponent(levelId)}/frames/${frameIndex}` +
      `?session=${encodeURIComponent(sessionToken)}`
    );
  }

  postClick(
    sessionToken: string,
    frame: number,
    x: number,
    y: number,
    clickId: string,
  ): Promise<ClickResult> {
    return this.json<ClickResult>("/clicks", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session: sessionToken, frame, x, y, click_id: clickId }),
    });
  }

  completeLevel(levelId: string, sessionToken: string): Promise<LevelResult> {
    return this.json<LevelResult>(
      `/levels/${encodeURIComponent(levelId)}/complete` +
        `?session=${encodeURIComponent(sessionToken)}`,
      { method: "POST" },
    );
  }

  leaderboard(): Promise<LeaderboardRow[]> {
    return this.json<LeaderboardRow[]>("/leaderboard");
  }
}
