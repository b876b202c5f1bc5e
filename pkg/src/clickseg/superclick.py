"""Stage 1: turn a frame's clicks into clicked superpixels.

Each superpixel gets a foreground probability from three additive cues:
how heavily it was clicked relative to the frame's most-clicked superpixel
(quality-weighted), how many of its neighbors are heavily clicked, and a
constant floor that lets labels spread into unclicked parts of an object.
The negative log-likelihoods become unary costs; appearance-similar
neighbors are tied by exp(-beta1 * chi2) pairwise weights; a minimum cut
yields the superclick labeling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoordinateRangeError
from .media import Click, ClickLog
from .mrf import EnergyProblem, minimize
from .params import Params
from .superpixels import AdjacencyGraph, SuperpixelMap, chi_square_pairs, map_histograms


@dataclass
class SuperclickLabeling:
    """Per-superpixel binary flags plus the cue values that produced them
    (kept for diagnostics)."""

    labels: np.ndarray  # (n,) uint8
    p_fg: np.ndarray  # (n,) float64
    k_s: np.ndarray | None = None
    v_s: np.ndarray | None = None


def diagnostics_csv(labeling: SuperclickLabeling) -> str:
    """CSV dump of (superpixel id, K_s, V_s, P_fg, label) for one frame."""
    lines = ["superpixel,k_s,v_s,p_fg,label"]
    n = len(labeling.labels)
    k = labeling.k_s if labeling.k_s is not None else np.zeros(n)
    v = labeling.v_s if labeling.v_s is not None else np.zeros(n)
    for i in range(n):
        lines.append(
            f"{i},{k[i]:.6g},{v[i]:.6g},{labeling.p_fg[i]:.6g},{labeling.labels[i]}"
        )
    return "\n".join(lines) + "\n"


def shift_clicks(log: ClickLog, delay: int) -> ClickLog:
    """Move every click `delay` frames back; clicks shifted below 0 drop."""
    if delay < 0:
        raise ValueError("delay must be >= 0")
    if delay == 0:
        return ClickLog(clicks=list(log.clicks), provenance=log.provenance)
    shifted = [
        Click(
            frame_index=c.frame_index - delay,
            x=c.x,
            y=c.y,
            user_id=c.user_id,
            level_id=c.level_id,
            quality=c.quality,
            t_ms=c.t_ms,
            extra=dict(c.extra),
        )
        for c in log.clicks
        if c.frame_index - delay >= 0
    ]
    return ClickLog(clicks=shifted, provenance=log.provenance)


def clickedness(spmap: SuperpixelMap, clicks_in_frame: list[Click]) -> np.ndarray:
    """Quality-weighted click mass per superpixel, normalized by the raw
    click count of the most-clicked superpixel. No clicks -> all zeros."""
    n = spmap.n_superpixels
    if not clicks_in_frame:
        return np.zeros(n)
    qsum = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    h, w = spmap.labels.shape
    for c in clicks_in_frame:
        if not (0 <= c.x < w and 0 <= c.y < h):
            raise CoordinateRangeError(f"click ({c.x}, {c.y}) outside {w}x{h} frame")
        s = spmap.labels[c.y, c.x]
        qsum[s] += c.quality
        counts[s] += 1
    return qsum / counts.max()


def proximity(k_scores: np.ndarray, adj: AdjacencyGraph, threshold: float = 0.5) -> np.ndarray:
    """Fraction of each superpixel's neighbors whose clickedness exceeds the
    threshold; isolated superpixels score 0."""
    n = len(k_scores)
    hot = (np.asarray(k_scores) > threshold).astype(np.float64)
    degree = np.zeros(n)
    hot_neighbors = np.zeros(n)
    if adj.pairs.size:
        i = adj.pairs[:, 0]
        j = adj.pairs[:, 1]
        np.add.at(degree, i, 1.0)
        np.add.at(degree, j, 1.0)
        np.add.at(hot_neighbors, i, hot[j])
        np.add.at(hot_neighbors, j, hot[i])
    return np.where(degree > 0, hot_neighbors / np.maximum(degree, 1.0), 0.0)


def superclick_probability(k_s, v_s, u_s: float, epsilon: float = 1e-6):
    """Foreground / background probability from the three additive cues,
    clipped away from {0, 1} so log costs stay finite."""
    p1 = np.clip(np.minimum(np.asarray(k_s) + np.asarray(v_s) + u_s, 1.0), epsilon, 1.0 - epsilon)
    return p1, 1.0 - p1


def _unaries(
    spmap: SuperpixelMap,
    adj: AdjacencyGraph,
    clicks_in_frame: list[Click],
    params: Params,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    k_s = clickedness(spmap, clicks_in_frame)
    v_s = proximity(k_s, adj, params.proximity_threshold)
    p1, p0 = superclick_probability(k_s, v_s, params.u_s, params.prob_epsilon)
    unary = np.empty((spmap.n_superpixels, 2))
    unary[:, 0] = params.alpha1 * -np.log(p0)
    unary[:, 1] = params.alpha1 * -np.log(p1)
    return unary, p1, k_s, v_s


def pairwise_weights(
    histograms: np.ndarray, pairs: np.ndarray, beta1: float
) -> np.ndarray:
    return np.exp(-beta1 * chi_square_pairs(histograms, pairs))


def _pairwise_array(pairs: np.ndarray, weights: np.ndarray) -> np.ndarray:
    if pairs.size == 0:
        return np.zeros((0, 3))
    return np.column_stack([pairs.astype(np.float64), weights])


def build_E1(
    frame: np.ndarray,
    spmap: SuperpixelMap,
    adj: AdjacencyGraph,
    clicks_in_frame: list[Click],
    params: Params,
    histograms: np.ndarray | None = None,
    edge_weights: np.ndarray | None = None,
) -> EnergyProblem:
    """Assemble the stage-1 energy over one frame's superpixels."""
    unary, _, _, _ = _unaries(spmap, adj, clicks_in_frame, params)
    if edge_weights is None:
        if histograms is None:
            histograms = map_histograms(frame, spmap, params.histogram_bins)
        edge_weights = pairwise_weights(histograms, adj.pairs, params.beta1)
    return EnergyProblem(
        n_nodes=spmap.n_superpixels,
        unary=unary,
        pairwise=_pairwise_array(adj.pairs, edge_weights),
    )


def extract_superclicks(
    frame: np.ndarray,
    spmap: SuperpixelMap,
    adj: AdjacencyGraph,
    clicks_in_frame: list[Click],
    params: Params,
    histograms: np.ndarray | None = None,
    edge_weights: np.ndarray | None = None,
) -> SuperclickLabeling:
    """Minimize the stage-1 energy and return the superclick flags."""
    unary, p1, k_s, v_s = _unaries(spmap, adj, clicks_in_frame, params)
    if edge_weights is None:
        if histograms is None:
            histograms = map_histograms(frame, spmap, params.histogram_bins)
        edge_weights = pairwise_weights(histograms, adj.pairs, params.beta1)
    problem = EnergyProblem(
        n_nodes=spmap.n_superpixels,
        unary=unary,
        pairwise=_pairwise_array(adj.pairs, edge_weights),
    )
    result = minimize(problem)
    return SuperclickLabeling(labels=result.labeling, p_fg=p1, k_s=k_s, v_s=v_s)
