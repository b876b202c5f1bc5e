"""HTTP service hosting game levels.

Serves level frames (with saliency-inhibition blur composited on), ingests
clicks, keeps session scores and the all-time leaderboard, and exposes the
current score segmentation. Every scored click is persisted to the click
log before the response is sent; the stored frames are never blurred, only
the served copies are.
"""

from __future__ import annotations

import logging
import secrets
import threading
import time
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import game, media
from .errors import WriteError
from .media import Click, FrameSequence, MaskSequence

logger = logging.getLogger("clickseg.service")

MAX_BLUR_RADIUS = 8.0
SESSION_GRACE_SECONDS = 5.0


@dataclass
class ServiceLevel:
    level_id: str
    level_index: int  # 1-based
    sequence: FrameSequence
    segmentation: game.ScoreSegmentation
    frame_png: list[bytes] = field(default_factory=list)

    def __post_init__(self):
        if not self.frame_png:
            self.frame_png = [
                media.encode_frame_png(self.sequence.frame(i))
                for i in range(len(self.sequence))
            ]


@dataclass
class Session:
    token: str
    user_id: str
    level_id: str
    started_at: float
    expires_at: float
    state: game.SessionState = field(default_factory=game.SessionState)
    completed: bool = False
    seen_click_ids: dict[str, dict] = field(default_factory=dict)


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _box_blur(img: np.ndarray, radius: float) -> np.ndarray:
    """Gaussian-like blur: three successive box filters of the given radius."""
    size = max(1, 2 * int(round(radius / 2.0)) + 1)
    out = img.astype(np.float64)
    for _ in range(3):
        out = ndimage.uniform_filter(out, size=(size, size, 1))
    return out


def blur_frame(frame: np.ndarray, weight_map: np.ndarray) -> np.ndarray:
    """Per-pixel blur whose radius scales with the weight map (max 8 px),
    realized as linear blending between precomputed blur levels."""
    if weight_map.max() <= 0:
        return frame
    levels = 4
    radii = [MAX_BLUR_RADIUS * i / (levels - 1) for i in range(levels)]
    stack = [frame.astype(np.float64)]
    for r in radii[1:]:
        stack.append(_box_blur(frame, r))
    pos = np.clip(weight_map, 0.0, 1.0) * (levels - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, levels - 1)
    frac = (pos - lo)[:, :, None]
    arr = np.stack(stack)  # (levels, h, w, 3)
    rows = np.arange(frame.shape[0])[:, None]
    cols = np.arange(frame.shape[1])[None, :]
    blended = arr[lo, rows, cols] * (1.0 - frac) + arr[hi, rows, cols] * frac
    return np.clip(np.rint(blended), 0, 255).astype(np.uint8)


class GameService:
    """All service behavior, independent of the HTTP layer."""

    def __init__(
        self,
        levels: list[ServiceLevel],
        click_log_path,
        time_fn=time.time,
        session_seconds: float | None = None,
    ):
        self.levels = {lvl.level_id: lvl for lvl in levels}
        self.click_log_path = click_log_path
        self.time_fn = time_fn
        self.session_seconds = session_seconds
        self.sessions: dict[str, Session] = {}
        self.best_scores: dict[str, tuple[int, float]] = {}  # user -> (best, when)
        self.games_played: dict[str, int] = {}
        self._log_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._click_cache: dict[str, list[Click]] = {
            lvl_id: [] for lvl_id in self.levels
        }
        for c in media.read_click_log(click_log_path).clicks:
            self._click_cache.setdefault(c.level_id, []).append(c)

    # -- levels ----------------------------------------------------------

    def list_levels(self, session_token: str | None = None) -> list[dict]:
        ordered = sorted(self.levels.values(), key=lambda l: l.level_index)
        if session_token:
            seed = zlib.crc32(session_token.encode("utf-8"))
            perm = np.random.default_rng(seed).permutation(len(ordered))
            ordered = [ordered[i] for i in perm]
        return [
            {
                "id": lvl.level_id,
                "index": lvl.level_index,
                "frames": len(lvl.sequence),
                "width": lvl.sequence.width,
                "height": lvl.sequence.height,
                "frame_rate": lvl.sequence.frame_rate,
                "required_points": game.required_points(lvl.level_index),
            }
            for lvl in ordered
        ]

    def set_segmentation(self, level_id: str, masks: MaskSequence) -> None:
        """Atomic swap of the published score segmentation."""
        level = self.levels[level_id]
        level.segmentation = game.ScoreSegmentation(masks)

    # -- sessions ---------------------------------------------------------

    def open_session(self, user_id: str, level_id: str) -> Session:
        if level_id not in self.levels:
            raise ApiError(404, f"unknown level {level_id!r}")
        level = self.levels[level_id]
        now = self.time_fn()
        ttl = (
            self.session_seconds
            if self.session_seconds is not None
            else level.sequence.frames.shape[0] / level.sequence.frame_rate
            + SESSION_GRACE_SECONDS
        )
        session = Session(
            token=secrets.token_hex(16),
            user_id=user_id,
            level_id=level_id,
            started_at=now,
            expires_at=now + ttl,
        )
        with self._state_lock:
            self.sessions[session.token] = session
        return session

    def _session(self, token: str | None, allow_expired: bool = False) -> Session:
        if not token or token not in self.sessions:
            raise ApiError(401, "unknown or missing session token")
        session = self.sessions[token]
        if not allow_expired and self.time_fn() > session.expires_at:
            raise ApiError(409, "session expired")
        return session

    # -- frames -----------------------------------------------------------

    def get_frame(self, level_id: str, frame_index: int, token: str) -> bytes:
        session = self._session(token, allow_expired=True)
        if session.level_id != level_id:
            raise ApiError(401, "session is bound to another level")
        level = self.levels.get(level_id)
        if level is None:
            raise ApiError(404, f"unknown level {level_id!r}")
        if not 0 <= frame_index < len(level.sequence):
            raise ApiError(404, f"frame {frame_index} out of range")
        weight = game.ior_blur_map(
            self._click_cache.get(level_id, []),
            frame_index,
            level.sequence.width,
            level.sequence.height,
        )
        if weight.max() <= 0:
            return level.frame_png[frame_index]
        blurred = blur_frame(level.sequence.frame(frame_index), weight)
        return media.encode_frame_png(blurred)

    def get_segmentation_frame(self, level_id: str, frame_index: int) -> bytes:
        level = self.levels.get(level_id)
        if level is None:
            raise ApiError(404, f"unknown level {level_id!r}")
        if not 0 <= frame_index < len(level.segmentation):
            raise ApiError(404, f"frame {frame_index} out of range")
        return media.encode_mask_png(level.segmentation.masks.mask(frame_index))

    # -- clicks -----------------------------------------------------------

    def post_click(
        self,
        token: str,
        frame_index: int,
        x: int,
        y: int,
        click_id: str | None = None,
    ) -> dict:
        session = self._session(token)
        level = self.levels[session.level_id]
        if click_id is not None and click_id in session.seen_click_ids:
            return session.seen_click_ids[click_id]
        if not 0 <= frame_index < len(level.sequence):
            raise ApiError(400, f"frame {frame_index} out of range")
        if not (0 <= x < level.sequence.width and 0 <= y < level.sequence.height):
            raise ApiError(400, f"({x}, {y}) outside the frame")
        click = Click(
            frame_index=frame_index,
            x=x,
            y=y,
            user_id=session.user_id,
            level_id=session.level_id,
            t_ms=int(self.time_fn() * 1000),
            extra={"click_id": click_id} if click_id else {},
        )
        with self._state_lock:
            outcome = game.classify_click(click, level.segmentation)
            new_state, delta = game.apply_click(
                session.state, click, level.segmentation
            )
            # Durability first: no response (and no state change) without a
            # persisted log line.
            with self._log_lock:
                try:
                    media.append_clicks(self.click_log_path, [click])
                except WriteError as exc:
                    logger.error("click persistence failed: %s", exc)
                    raise ApiError(503, "click could not be persisted") from exc
            session.state = new_state
            self._click_cache.setdefault(session.level_id, []).append(click)
            response = {
                "delta": delta,
                "score": new_state.score,
                "hit": isinstance(outcome, game.Hit),
            }
            if click_id is not None:
                session.seen_click_ids[click_id] = response
        return response

    # -- completion and leaderboard ----------------------------------------

    def complete_level(self, token: str) -> dict:
        session = self._session(token, allow_expired=True)
        level = self.levels[session.level_id]
        required = game.required_points(level.level_index)
        achieved = session.state.score
        passed = achieved >= required
        with self._state_lock:
            if not session.completed:
                session.completed = True
                self.games_played[session.user_id] = (
                    self.games_played.get(session.user_id, 0) + 1
                )
                best = self.best_scores.get(session.user_id)
                if best is None or achieved > best[0]:
                    self.best_scores[session.user_id] = (achieved, self.time_fn())
        self._stamp_quality(session.user_id, session.level_id)
        return {"passed": passed, "required": required, "achieved": achieved}

    def _stamp_quality(self, user_id: str, level_id: str) -> None:
        """Recompute the user's per-level click quality and rewrite the log."""
        level = self.levels[level_id]
        with self._log_lock:
            log = media.read_click_log(self.click_log_path)
            mine = [
                c
                for c in log.clicks
                if c.user_id == user_id and c.level_id == level_id
            ]
            quality = game.click_quality(mine, level.segmentation)
            for c in mine:
                c.quality = quality
            media.rewrite_click_log(self.click_log_path, log.clicks)
        for c in self._click_cache.get(level_id, []):
            if c.user_id == user_id:
                c.quality = quality

    def leaderboard(self) -> list[dict]:
        entries = sorted(
            self.best_scores.items(), key=lambda kv: (-kv[1][0], kv[1][1])
        )
        return [
            {
                "user": user,
                "best_score": best,
                "games_played": self.games_played.get(user, 0),
            }
            for user, (best, _) in entries
        ]

    def leaderboard_csv(self) -> str:
        return game.leaderboard_csv(
            [
                (row["user"], row["best_score"], row["games_played"])
                for row in self.leaderboard()
            ]
        )


def create_app(service: GameService, static_dir=None):
    """FastAPI wrapper exposing the service under /api/v1."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse, Response

    app = FastAPI(title="clickseg game service")
    app.state.service = service

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    @app.get("/api/v1/levels")
    def list_levels(session: str | None = None):
        return service.list_levels(session)

    @app.post("/api/v1/sessions")
    def open_session(body: dict):
        user = body.get("user")
        level = body.get("level")
        if not user or not level:
            raise ApiError(400, "body must carry 'user' and 'level'")
        s = service.open_session(str(user), str(level))
        return {
            "token": s.token,
            "user": s.user_id,
            "level": s.level_id,
            "expires_at": s.expires_at,
        }

    @app.get("/api/v1/levels/{level_id}/frames/{frame_index}")
    def get_frame(level_id: str, frame_index: int, session: str | None = None):
        data = service.get_frame(level_id, frame_index, session)
        return Response(content=data, media_type="image/png")

    @app.get("/api/v1/levels/{level_id}/segmentation/{frame_index}")
    def get_segmentation(level_id: str, frame_index: int):
        data = service.get_segmentation_frame(level_id, frame_index)
        return Response(content=data, media_type="image/png")

    @app.post("/api/v1/clicks")
    def post_click(body: dict):
        for key in ("session", "frame", "x", "y"):
            if key not in body:
                raise ApiError(400, f"body must carry {key!r}")
        return service.post_click(
            str(body["session"]),
            int(body["frame"]),
            int(body["x"]),
            int(body["y"]),
            click_id=body.get("click_id"),
        )

    @app.post("/api/v1/levels/{level_id}/complete")
    def complete(level_id: str, session: str | None = None):
        result = service.complete_level(session)
        return result

    @app.get("/api/v1/leaderboard")
    def leaderboard():
        return service.leaderboard()

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True))
    return app


def build_service(
    levels_root,
    click_log_path,
    time_fn=time.time,
    session_seconds: float | None = None,
) -> GameService:
    """Load levels from subdirectories of `levels_root`.

    Each subdirectory is one level holding `frames/` (numbered PNGs) and
    optionally `segmentation/` (numbered mask PNGs). Missing segmentations
    are bootstrapped from motion.
    """
    from pathlib import Path

    root = Path(levels_root)
    level_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    levels = []
    for index, d in enumerate(level_dirs, start=1):
        seq = media.load_frame_sequence(d / "frames")
        seg_dir = d / "segmentation"
        if seg_dir.is_dir():
            seg = game.ScoreSegmentation(media.read_mask_sequence(seg_dir))
        else:
            seg = game.bootstrap_segmentation(seq)
        levels.append(
            ServiceLevel(
                level_id=d.name, level_index=index, sequence=seq, segmentation=seg
            )
        )
    return GameService(
        levels,
        click_log_path,
        time_fn=time_fn,
        session_seconds=session_seconds,
    )
