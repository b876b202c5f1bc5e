"""Segmentation metrics and the synthetic clicker harness.

Precision/recall/F1 are computed from pixel counts summed over all frames
of a category, never frame-averaged. Overlap is the per-frame intersection
over union averaged across frames. The simulator stands in for human
players: Poisson click volume, aim noise, reaction delay, outright misses,
and a per-user saliency bias that concentrates a player's clicks on the
objects they personally find big.
"""

from __future__ import annotations

import csv
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ShapeMismatchError
from .game import ScoreSegmentation, click_quality
from .media import Click, ClickLog, FrameSequence, MaskSequence
from .params import Params
from .temporal import SequenceArtifacts, compute_artifacts, smooth_segment

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
# Spread of the per-user lognormal perception noise on object areas; this is
# what makes different simulated users favor different objects.
_PERCEPTION_SIGMA = 0.5


@dataclass(frozen=True)
class ConfusionTotals:
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class ClickerProfile:
    """Behavior of one simulated player."""

    clicks_per_frame_rate: float
    spatial_sigma: float = 0.0
    reaction_delay: int = 0
    miss_rate: float = 0.0
    target_bias: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.clicks_per_frame_rate < 0 or self.spatial_sigma < 0:
            raise ValueError("rates must be >= 0")
        if self.reaction_delay < 0 or self.target_bias < 0:
            raise ValueError("delay and bias must be >= 0")
        if not 0.0 <= self.miss_rate <= 1.0:
            raise ValueError("miss_rate must lie in [0, 1]")


def _check_aligned(output: MaskSequence, gt: MaskSequence) -> None:
    if output.masks.shape != gt.masks.shape:
        raise ShapeMismatchError(
            f"mask stacks differ: {output.masks.shape} vs {gt.masks.shape}"
        )


def confusion_totals(output: MaskSequence, gt: MaskSequence) -> ConfusionTotals:
    _check_aligned(output, gt)
    out, ref = output.masks, gt.masks
    return ConfusionTotals(
        tp=int((out & ref).sum()),
        fp=int((out & ~ref).sum()),
        fn=int((~out & ref).sum()),
    )


def prf(output: MaskSequence, gt: MaskSequence) -> tuple[float, float, float]:
    """Precision, recall and F1 over summed pixel counts; 0/0 ratios are 0."""
    t = confusion_totals(output, gt)
    pr = t.tp / (t.tp + t.fp) if (t.tp + t.fp) > 0 else 0.0
    rec = t.tp / (t.tp + t.fn) if (t.tp + t.fn) > 0 else 0.0
    f1 = 2.0 * pr * rec / (pr + rec) if (pr + rec) > 0 else 0.0
    return pr, rec, f1


def pom(output: MaskSequence, gt: MaskSequence) -> float:
    """Mean per-frame intersection over union. Frames empty on both sides
    are skipped; if every frame is skipped the sequences agree, so 1.0."""
    _check_aligned(output, gt)
    scores = []
    for i in range(len(gt)):
        o, g = output.mask(i), gt.mask(i)
        union = int((o | g).sum())
        if union == 0:
            continue
        scores.append(int((o & g).sum()) / union)
    return float(np.mean(scores)) if scores else 1.0


def _user_rng(seed: int, user_id: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(user_id.encode("utf-8"))])


def simulate_clicks(
    gt: MaskSequence, profile: ClickerProfile, user_id: str, level_id: str
) -> ClickLog:
    """Draw clicks against ground-truth masks.

    Per frame, Poisson(rate) clicks are drawn. Each click either targets a
    uniform background point (with miss_rate) or picks an object with
    weights (perceived area)^target_bias, where the perceived area carries
    a persistent per-user lognormal factor per area rank. The aim point is
    uniform inside the target plus Gaussian(spatial_sigma) noise, clamped
    to the frame, and recorded reaction_delay frames late (dropped past the
    end). Bit-reproducible for a fixed seed.
    """
    n = len(gt)
    if n == 0:
        raise ValueError("ground truth is empty")
    h, w = gt.height, gt.width
    rng = np.random.default_rng(profile.seed)
    # Persistent per-user object perception, indexed by area rank.
    perception = np.exp(
        _user_rng(profile.seed, user_id).normal(0.0, _PERCEPTION_SIGMA, size=256)
    )

    clicks: list[Click] = []
    for i in range(n):
        k = int(rng.poisson(profile.clicks_per_frame_rate))
        if k == 0:
            continue
        mask = gt.mask(i)
        labeled, n_comp = ndimage.label(mask, structure=_FOUR_CONNECTED)
        comp_coords = []
        areas = []
        if n_comp > 0:
            sizes = np.bincount(labeled.ravel(), minlength=n_comp + 1)[1:]
            order = np.argsort(-sizes, kind="stable")  # rank 0 = largest
            for comp in order:
                ys, xs = np.nonzero(labeled == comp + 1)
                comp_coords.append((ys, xs))
                areas.append(float(sizes[comp]))
        bg_coords = np.nonzero(~mask)
        if areas:
            weights = np.array(
                [
                    (a * perception[min(r, len(perception) - 1)])
                    ** profile.target_bias
                    for r, a in enumerate(areas)
                ]
            )
            weights = weights / weights.sum()
        else:
            weights = None

        for _ in range(k):
            miss = rng.random() < profile.miss_rate or weights is None
            if miss and bg_coords[0].size > 0:
                j = int(rng.integers(bg_coords[0].size))
                py, px = int(bg_coords[0][j]), int(bg_coords[1][j])
            elif miss:
                py = int(rng.integers(h))
                px = int(rng.integers(w))
            else:
                target = int(rng.choice(len(areas), p=weights))
                ys, xs = comp_coords[target]
                j = int(rng.integers(ys.size))
                py, px = int(ys[j]), int(xs[j])
            if profile.spatial_sigma > 0:
                noise = rng.normal(0.0, profile.spatial_sigma, size=2)
                px = int(round(px + noise[0]))
                py = int(round(py + noise[1]))
            px = min(max(px, 0), w - 1)
            py = min(max(py, 0), h - 1)
            frame = i + profile.reaction_delay
            if frame >= n:
                continue
            clicks.append(
                Click(
                    frame_index=frame,
                    x=px,
                    y=py,
                    user_id=user_id,
                    level_id=level_id,
                )
            )
    return ClickLog(clicks=clicks, provenance=f"simulated:{user_id}:{profile.seed}")


def simulate_users(
    gt: MaskSequence,
    profile: ClickerProfile,
    n_users: int,
    level_id: str,
    seed: int,
) -> ClickLog:
    """Several simulated players splitting the same total click budget."""
    per_user_rate = profile.clicks_per_frame_rate / n_users
    clicks: list[Click] = []
    for u in range(n_users):
        p = ClickerProfile(
            clicks_per_frame_rate=per_user_rate,
            spatial_sigma=profile.spatial_sigma,
            reaction_delay=profile.reaction_delay,
            miss_rate=profile.miss_rate,
            target_bias=profile.target_bias,
            seed=seed * 1000003 + u,
        )
        clicks.extend(simulate_clicks(gt, p, f"user{u}", level_id).clicks)
    clicks.sort(key=lambda c: (c.frame_index, c.user_id))
    return ClickLog(clicks=clicks, provenance=f"simulated:{n_users}users:{seed}")


def synthetic_scene(
    n_frames: int = 30,
    height: int = 90,
    width: int = 120,
    n_objects: int = 2,
    seed: int = 0,
    min_size: int = 16,
    max_size: int = 30,
    min_speed: int = 1,
    max_speed: int = 3,
) -> tuple[FrameSequence, MaskSequence]:
    """Moving textured rectangles over a cluttered background, with masks.

    Each object bounces inside its own grid cell so objects never merge and
    their area ranking stays stable across frames. Objects are strongly
    hued and internally fairly homogeneous (as real foreground objects
    tend to be) against a gray-noise background.
    """
    r = np.random.default_rng(seed)
    bg = ndimage.gaussian_filter(r.uniform(40, 215, (height, width, 3)), (3, 3, 0))
    cols = int(np.ceil(np.sqrt(n_objects)))
    rows = int(np.ceil(n_objects / cols))
    cell_w, cell_h = width // cols, height // rows
    sizes = np.linspace(min_size, max_size, n_objects)
    r.shuffle(sizes)

    objs = []
    for k in range(n_objects):
        s = int(sizes[k])
        s = min(s, cell_w - 4, cell_h - 4)
        tex = ndimage.gaussian_filter(r.uniform(0, 110, (s, s, 3)), (2.5, 2.5, 0))
        hue = int(r.integers(0, 3))
        tex[:, :, hue] = np.clip(tex[:, :, hue] * 0.4 + 190, 0, 255)
        tex[:, :, (hue + 1) % 3] *= 0.25
        cx0 = (k % cols) * cell_w
        cy0 = (k // cols) * cell_h
        span_x = max(1, cell_w - s - 2)
        span_y = max(1, cell_h - s - 2)
        x0 = int(r.integers(0, span_x))
        y0 = int(r.integers(0, span_y))
        vx = int(r.integers(min_speed, max_speed + 1))
        vy = int(r.integers(-max_speed, max_speed + 1))
        objs.append((s, tex, cx0 + 1, cy0 + 1, span_x, span_y, x0, y0, vx, vy))

    def _bounce(p0: int, v: int, t: int, span: int) -> int:
        if span <= 1:
            return 0
        period = 2 * (span - 1)
        q = (p0 + v * t) % period
        return q if q < span else period - q

    frames = np.zeros((n_frames, height, width, 3), dtype=np.uint8)
    masks = np.zeros((n_frames, height, width), dtype=bool)
    for t in range(n_frames):
        img = bg.copy()
        m = np.zeros((height, width), dtype=bool)
        for s, tex, bx, by, span_x, span_y, x0, y0, vx, vy in objs:
            x = bx + _bounce(x0, vx, t, span_x)
            y = by + _bounce(y0, vy, t, span_y)
            img[y : y + s, x : x + s] = tex
            m[y : y + s, x : x + s] = True
        frames[t] = np.clip(img, 0, 255).astype(np.uint8)
        masks[t] = m
    return FrameSequence(frames=frames), MaskSequence(masks=masks)


def gt_point_clicks(
    gt: MaskSequence,
    pixels_per_click: int = 200,
    seed: int = 0,
    user_id: str = "oracle",
    level_id: str = "gt",
) -> ClickLog:
    """Uniform clicks inside the ground-truth masks, one per N object pixels."""
    rng = np.random.default_rng(seed)
    clicks = []
    for t in range(len(gt)):
        ys, xs = np.nonzero(gt.mask(t))
        if ys.size == 0:
            continue
        k = max(1, ys.size // pixels_per_click)
        idx = rng.choice(ys.size, size=k, replace=False)
        for i in idx:
            clicks.append(
                Click(
                    frame_index=t,
                    x=int(xs[i]),
                    y=int(ys[i]),
                    user_id=user_id,
                    level_id=level_id,
                )
            )
    return ClickLog(clicks=clicks, provenance=f"gt-points:{seed}")


ABLATION_CSV_HEADER = ["cell_id", "pr", "rec", "f1", "pom", "n_clicks", "wall_ms"]


@dataclass
class AblationConfig:
    """One-axis-at-a-time sweeps mirroring the playtime / players / delay /
    quality experiment designs, each cell averaged over the seeds."""

    sequence: FrameSequence
    gt: MaskSequence
    params: Params
    profile: ClickerProfile
    fractions: tuple[float, ...] = ()
    user_counts: tuple[int, ...] = ()
    delays: tuple[int, ...] = ()
    quality_bands: tuple[tuple[float, float], ...] = ()
    seeds: tuple[int, ...] = (0,)
    n_users: int = 1
    out_csv: str | Path | None = None
    artifacts: SequenceArtifacts | None = field(default=None, repr=False)


def _subset(log: ClickLog, fraction: float, seed: int) -> ClickLog:
    if fraction >= 1.0:
        return log
    k = int(round(len(log.clicks) * fraction))
    rng = np.random.default_rng([seed, 0xC11C])
    idx = np.sort(rng.choice(len(log.clicks), size=k, replace=False))
    return ClickLog(clicks=[log.clicks[i] for i in idx], provenance=log.provenance)


def _quality_band(
    log: ClickLog, band: tuple[float, float], gt: MaskSequence
) -> ClickLog:
    """Stamp per-user quality against the ground truth, keep clicks in band."""
    seg = ScoreSegmentation(gt)
    by_user: dict[str, list[Click]] = {}
    for c in log.clicks:
        by_user.setdefault(c.user_id, []).append(c)
    quality = {u: click_quality(cs, seg) for u, cs in by_user.items()}
    lo, hi = band
    kept = [
        Click(
            frame_index=c.frame_index,
            x=c.x,
            y=c.y,
            user_id=c.user_id,
            level_id=c.level_id,
            quality=quality[c.user_id],
        )
        for c in log.clicks
        if lo <= quality[c.user_id] <= hi
    ]
    return ClickLog(clicks=kept, provenance=log.provenance)


def _run_cell(
    config: AblationConfig,
    cell_id: str,
    logs_and_params: list[tuple[ClickLog, Params]],
) -> dict:
    prs, recs, f1s, poms, counts = [], [], [], [], []
    start = time.perf_counter()
    for log, params in logs_and_params:
        out = smooth_segment(config.sequence, log, params, artifacts=config.artifacts)
        p, r, f = prf(out, config.gt)
        prs.append(p)
        recs.append(r)
        f1s.append(f)
        poms.append(pom(out, config.gt))
        counts.append(len(log))
    wall_ms = (time.perf_counter() - start) * 1000.0
    return {
        "cell_id": cell_id,
        "pr": float(np.mean(prs)),
        "rec": float(np.mean(recs)),
        "f1": float(np.mean(f1s)),
        "pom": float(np.mean(poms)),
        "n_clicks": float(np.mean(counts)),
        "wall_ms": wall_ms,
    }


def ablation_run(config: AblationConfig) -> list[dict]:
    """Run every sweep cell through the full pipeline; one row per cell."""
    if config.artifacts is None:
        config.artifacts = compute_artifacts(config.sequence, config.params)

    def logs_for_seed(seed: int) -> ClickLog:
        return simulate_users(
            config.gt,
            config.profile,
            config.n_users,
            level_id="ablation",
            seed=seed,
        )

    rows = []
    for fraction in config.fractions:
        cells = [
            (_subset(logs_for_seed(s), fraction, s), config.params)
            for s in config.seeds
        ]
        rows.append(_run_cell(config, f"fraction={fraction:g}", cells))
    for n_users in config.user_counts:
        cells = [
            (
                simulate_users(config.gt, config.profile, n_users, "ablation", s),
                config.params,
            )
            for s in config.seeds
        ]
        rows.append(_run_cell(config, f"users={n_users}", cells))
    for delay in config.delays:
        params = config.params.with_overrides(click_delay=delay)
        cells = [(logs_for_seed(s), params) for s in config.seeds]
        rows.append(_run_cell(config, f"delay={delay}", cells))
    for band in config.quality_bands:
        cells = [
            (_quality_band(logs_for_seed(s), band, config.gt), config.params)
            for s in config.seeds
        ]
        rows.append(_run_cell(config, f"quality={band[0]:g}-{band[1]:g}", cells))

    if config.out_csv is not None:
        write_ablation_csv(rows, config.out_csv)
    return rows


def write_ablation_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=ABLATION_CSV_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
