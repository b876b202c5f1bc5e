"""Dense optical flow and superpixel temporal linking.

Flow is coarse-to-fine iterative Lucas-Kanade on a 3-level pyramid with 5x5
windows, run densely on luminance. Temporal links connect superpixel s in
frame t to superpixel s' in frame t+1 whenever at least one pixel of s,
displaced by its flow vector, lands inside s'.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatchError
from .superpixels import SuperpixelMap

# Tikhonov term added to the structure tensor diagonal; keeps flat regions
# at zero update instead of amplifying noise.
_LAMBDA = 1e-2


@dataclass
class FlowField:
    """Per-pixel motion from frame t to t+1, in pixels."""

    dx: np.ndarray  # (h, w) float64
    dy: np.ndarray

    @property
    def height(self) -> int:
        return self.dx.shape[0]

    @property
    def width(self) -> int:
        return self.dx.shape[1]

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.dx, self.dy)


@dataclass
class TemporalLinks:
    """Unique (superpixel in t, superpixel in t+1) pairs joined by flow."""

    pairs: np.ndarray  # (m, 2) int32

    def __len__(self) -> int:
        return self.pairs.shape[0]

    def as_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.pairs}


def luminance(frame: np.ndarray) -> np.ndarray:
    f = np.asarray(frame, dtype=np.float64)
    return 0.299 * f[:, :, 0] + 0.587 * f[:, :, 1] + 0.114 * f[:, :, 2]


def _downsample(img: np.ndarray) -> np.ndarray:
    return ndimage.gaussian_filter(img, sigma=1.0)[::2, ::2]


def _upsample_to(flow_component: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    up = np.repeat(np.repeat(flow_component, 2, axis=0), 2, axis=1) * 2.0
    out = up[: shape[0], : shape[1]]
    pad_y = shape[0] - out.shape[0]
    pad_x = shape[1] - out.shape[1]
    if pad_y or pad_x:
        out = np.pad(out, ((0, pad_y), (0, pad_x)), mode="edge")
    return out


def _lk_refine(
    i0: np.ndarray,
    i1: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    window: int,
    iterations: int,
    limit: float,
) -> tuple[np.ndarray, np.ndarray]:
    h, w = i0.shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    for _ in range(iterations):
        warped = ndimage.map_coordinates(i1, [yy + v, xx + u], order=1, mode="nearest")
        it = warped - i0
        gy, gx = np.gradient(0.5 * (i0 + warped))
        sxx = ndimage.uniform_filter(gx * gx, size=window) + _LAMBDA
        syy = ndimage.uniform_filter(gy * gy, size=window) + _LAMBDA
        sxy = ndimage.uniform_filter(gx * gy, size=window)
        sxt = ndimage.uniform_filter(gx * it, size=window)
        syt = ndimage.uniform_filter(gy * it, size=window)
        det = sxx * syy - sxy * sxy
        du = (-syy * sxt + sxy * syt) / det
        dv = (sxy * sxt - sxx * syt) / det
        half = window  # single-step displacement the window can witness
        u = np.clip(u + np.clip(du, -half, half), -limit, limit)
        v = np.clip(v + np.clip(dv, -half, half), -limit, limit)
        # Light field smoothing keeps sampling noise from feeding back
        # through the warp; exact for rigid translations.
        u = ndimage.gaussian_filter(u, sigma=1.5)
        v = ndimage.gaussian_filter(v, sigma=1.5)
    return u, v


def estimate_flow(
    frame_t: np.ndarray,
    frame_t1: np.ndarray,
    levels: int = 3,
    window: int = 5,
    iterations: int = 3,
    max_range: float = 16.0,
) -> FlowField:
    """Dense motion field from frame_t to frame_t1."""
    frame_t = np.asarray(frame_t)
    frame_t1 = np.asarray(frame_t1)
    if frame_t.shape != frame_t1.shape:
        raise DimensionMismatchError(
            f"frame shapes differ: {frame_t.shape} vs {frame_t1.shape}"
        )
    g0 = luminance(frame_t)
    g1 = luminance(frame_t1)

    pyr0, pyr1 = [g0], [g1]
    for _ in range(levels - 1):
        if min(pyr0[-1].shape) < 2 * window:
            break
        pyr0.append(_downsample(pyr0[-1]))
        pyr1.append(_downsample(pyr1[-1]))

    u = np.zeros_like(pyr0[-1])
    v = np.zeros_like(pyr0[-1])
    for level in range(len(pyr0) - 1, -1, -1):
        i0, i1 = pyr0[level], pyr1[level]
        if u.shape != i0.shape:
            u = _upsample_to(u, i0.shape)
            v = _upsample_to(v, i0.shape)
        limit = max_range / (2**level)
        u, v = _lk_refine(i0, i1, u, v, window, iterations, limit)
    return FlowField(dx=u, dy=v)


def temporal_links(
    map_t: SuperpixelMap, map_t1: SuperpixelMap, flow: FlowField
) -> TemporalLinks:
    """All pairs (s_t, s_t1) with some pixel of s_t projecting into s_t1."""
    if (
        map_t.labels.shape != map_t1.labels.shape
        or flow.dx.shape != map_t.labels.shape
    ):
        raise DimensionMismatchError("superpixel maps and flow must share dimensions")
    h, w = map_t.labels.shape
    yy, xx = np.mgrid[0:h, 0:w]
    tx = np.rint(xx + flow.dx).astype(np.int64)
    ty = np.rint(yy + flow.dy).astype(np.int64)
    valid = (tx >= 0) & (tx < w) & (ty >= 0) & (ty < h)
    src = map_t.labels[valid]
    dst = map_t1.labels[ty[valid], tx[valid]]
    if src.size == 0:
        return TemporalLinks(pairs=np.zeros((0, 2), dtype=np.int32))
    pairs = np.unique(np.stack([src, dst], axis=1), axis=0).astype(np.int32)
    return TemporalLinks(pairs=pairs)


def write_flow(field: FlowField, path: str | Path) -> None:
    """Regression dump: LE uint32 width/height header, then (dx, dy) float32
    pairs in row-major order."""
    h, w = field.dx.shape
    interleaved = np.empty((h, w, 2), dtype="<f4")
    interleaved[:, :, 0] = field.dx
    interleaved[:, :, 1] = field.dy
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", w, h))
        fh.write(interleaved.tobytes())


def read_flow(path: str | Path) -> FlowField:
    with open(path, "rb") as fh:
        w, h = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(h * w * 8), dtype="<f4").reshape(h, w, 2)
    return FlowField(
        dx=data[:, :, 0].astype(np.float64), dy=data[:, :, 1].astype(np.float64)
    )
