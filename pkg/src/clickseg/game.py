"""Game mechanics: scoring, hit classification, click quality, saliency
inhibition and the motion-based bootstrap segmentation.

Points reward clicks inside foreground objects, scaled by object area and
damped by repeated clicking in one spot; misses far from every object cost
an escalating penalty. Scoring runs against whatever score segmentation is
currently published, which starts from frame differencing before any
clicks exist and is later replaced by pipeline output.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import CoordinateRangeError, NeedMoreFramesError
from .flow import luminance
from .media import Click, FrameSequence, MaskSequence

FAR_MISS_DISTANCE = 200.0
REPEAT_REGION_HALF = 15  # 30x30 box around the anchor click
BASE_LEVEL_POINTS = 4000
POINTS_PER_LEVEL = 2000

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class Hit:
    component: int  # 1-based component id within the frame
    area: int


@dataclass(frozen=True)
class NearMiss:
    pass


@dataclass(frozen=True)
class FarMiss:
    pass


@dataclass(frozen=True)
class GameLevel:
    level_id: str
    level_index: int  # 1-based
    n_frames: int
    frame_rate: float = 10.0

    @property
    def duration_seconds(self) -> float:
        return self.n_frames / self.frame_rate


@dataclass(frozen=True)
class SessionState:
    """Score plus the two consecutive-click counters.

    t_plus counts consecutive hits inside the 30x30 box around the anchor
    (the first hit of the run); t_minus counts consecutive far misses.
    """

    score: int = 0
    t_plus: int = 0
    anchor: tuple[int, int] | None = None
    t_minus: int = 0
    clicks_seen: int = 0


class ScoreSegmentation:
    """Published per-frame foreground masks with cached component labels and
    foreground distance maps."""

    def __init__(self, masks: MaskSequence):
        self.masks = masks
        self._components: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._distance: dict[int, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.masks)

    def components(self, frame_index: int) -> tuple[np.ndarray, np.ndarray]:
        """(label image with 0 background, per-component areas)."""
        if frame_index not in self._components:
            labeled, n = ndimage.label(
                self.masks.mask(frame_index), structure=_FOUR_CONNECTED
            )
            areas = np.bincount(labeled.ravel(), minlength=n + 1)[1:]
            self._components[frame_index] = (labeled, areas)
        return self._components[frame_index]

    def distance_to_foreground(self, frame_index: int) -> np.ndarray:
        if frame_index not in self._distance:
            fg = self.masks.mask(frame_index)
            if fg.any():
                dist = ndimage.distance_transform_edt(~fg)
            else:
                dist = np.full(fg.shape, np.inf)
            self._distance[frame_index] = dist
        return self._distance[frame_index]


def required_points(level_index: int) -> int:
    """Points needed to pass a level: 4000, then +2000 per level."""
    if level_index < 1:
        raise ValueError("level_index is 1-based")
    return BASE_LEVEL_POINTS + POINTS_PER_LEVEL * (level_index - 1)


def award_points(area_a: int, t_plus: int) -> int:
    """Points for a correct click: (A/20) * (1 - t/10), floored at zero."""
    if area_a <= 0:
        raise ValueError("clicked component area must be positive")
    if t_plus < 0:
        raise ValueError("t_plus must be >= 0")
    raw = (area_a / 20.0) * (1.0 - t_plus / 10.0)
    return max(0, int(math.floor(raw + 0.5)))


def penalty(t_minus: int) -> int:
    """Points subtracted for the t-th consecutive far miss: 20 * t."""
    if t_minus < 1:
        raise ValueError("t_minus counts from 1")
    return 20 * t_minus


def classify_click(click: Click, seg: ScoreSegmentation) -> Hit | NearMiss | FarMiss:
    """Hit inside a component; FarMiss beyond 200 px of any foreground;
    NearMiss in between (no points either way)."""
    mask = seg.masks.mask(click.frame_index)
    h, w = mask.shape
    if not (0 <= click.x < w and 0 <= click.y < h):
        raise CoordinateRangeError(f"click ({click.x}, {click.y}) outside {w}x{h}")
    if mask[click.y, click.x]:
        labeled, areas = seg.components(click.frame_index)
        comp = int(labeled[click.y, click.x])
        return Hit(component=comp, area=int(areas[comp - 1]))
    dist = seg.distance_to_foreground(click.frame_index)[click.y, click.x]
    if dist > FAR_MISS_DISTANCE:
        return FarMiss()
    return NearMiss()


def apply_click(
    state: SessionState, click: Click, seg: ScoreSegmentation
) -> tuple[SessionState, int]:
    """Pure state transition: classify, award or penalize, update counters."""
    outcome = classify_click(click, seg)
    if isinstance(outcome, Hit):
        in_region = state.anchor is not None and (
            abs(click.x - state.anchor[0]) <= REPEAT_REGION_HALF
            and abs(click.y - state.anchor[1]) <= REPEAT_REGION_HALF
        )
        t_used = state.t_plus if in_region else 0
        delta = award_points(outcome.area, t_used)
        new_state = replace(
            state,
            score=state.score + delta,
            t_plus=t_used + 1,
            anchor=state.anchor if in_region else (click.x, click.y),
            t_minus=0,
            clicks_seen=state.clicks_seen + 1,
        )
        return new_state, delta
    if isinstance(outcome, FarMiss):
        t_minus = state.t_minus + 1
        delta = -penalty(t_minus)
        new_state = replace(
            state,
            score=state.score + delta,
            t_plus=0,
            anchor=None,
            t_minus=t_minus,
            clicks_seen=state.clicks_seen + 1,
        )
        return new_state, delta
    # Near miss: no points, no penalty; the far-miss streak is broken but
    # the hit streak is merely frozen.
    return replace(state, t_minus=0, clicks_seen=state.clicks_seen + 1), 0


def click_quality(clicks: list[Click], seg: ScoreSegmentation) -> float:
    """Fraction of a user's clicks in one level that hit foreground;
    no clicks means no evidence of noise, so 1.0."""
    if not clicks:
        return 1.0
    hits = sum(1 for c in clicks if isinstance(classify_click(c, seg), Hit))
    return hits / len(clicks)


def ior_density(
    clicks: list[Click], frame_index: int, width: int, height: int, sigma: float = 25.0
) -> np.ndarray:
    """Unnormalized kernel-density map of all users' clicks on one frame."""
    acc = np.zeros((height, width))
    for c in clicks:
        if c.frame_index != frame_index:
            continue
        if not (0 <= c.x < width and 0 <= c.y < height):
            continue
        acc[c.y, c.x] += 1.0
    if acc.max() == 0:
        return acc
    return ndimage.gaussian_filter(acc, sigma=sigma)


def ior_blur_map(
    clicks: list[Click], frame_index: int, width: int, height: int, sigma: float = 25.0
) -> np.ndarray:
    """Max-normalized click density in [0, 1]; all-zero when no clicks."""
    dens = ior_density(clicks, frame_index, width, height, sigma)
    peak = dens.max()
    if peak == 0:
        return dens
    return dens / peak


def _otsu_threshold(values: np.ndarray) -> float:
    """Otsu's threshold over a 256-bin histogram of non-negative values."""
    vmax = float(values.max())
    if vmax <= 0:
        return 0.0
    hist, edges = np.histogram(values, bins=256, range=(0.0, vmax))
    p = hist.astype(np.float64) / hist.sum()
    omega = np.cumsum(p)
    centers = 0.5 * (edges[:-1] + edges[1:])
    mu = np.cumsum(p * centers)
    mu_total = mu[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        sigma_b = (mu_total * omega - mu) ** 2 / (omega * (1.0 - omega))
    sigma_b[~np.isfinite(sigma_b)] = 0.0
    return float(centers[int(np.argmax(sigma_b))])


def bootstrap_segmentation(sequence: FrameSequence) -> ScoreSegmentation:
    """Motion-based foreground before any clicks exist: per frame, the
    pointwise minimum of the two neighboring absolute frame differences,
    thresholded by Otsu and closed with a 3x3 structuring element."""
    n = len(sequence)
    if n < 2:
        raise NeedMoreFramesError("need at least 2 frames to detect motion")
    gray = [luminance(sequence.frame(i)) for i in range(n)]
    masks = np.zeros((n, sequence.height, sequence.width), dtype=bool)
    for t in range(n):
        d_prev = np.abs(gray[t] - gray[t - 1]) if t > 0 else None
        d_next = np.abs(gray[t + 1] - gray[t]) if t < n - 1 else None
        if d_prev is not None and d_next is not None:
            motion = np.minimum(d_prev, d_next)
        else:
            motion = d_prev if d_prev is not None else d_next
        thr = _otsu_threshold(motion)
        if motion.max() <= 0:
            continue
        fg = motion > thr
        masks[t] = ndimage.binary_closing(fg, structure=np.ones((3, 3), dtype=bool))
    return ScoreSegmentation(MaskSequence(masks=masks))


def leaderboard_csv(rows: list[tuple[str, int, int]]) -> str:
    """CSV export of (user, best score, games played)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["user", "best_score", "games_played"])
    for user, best, games in rows:
        writer.writerow([user, best, games])
    return buf.getvalue()
