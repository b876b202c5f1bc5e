"""Stage 2: joint labeling over a sliding window of frames.

The window energy keeps each superpixel close to its stage-1 decision via
constant agree/disagree unary costs, reuses the appearance pairwise term
inside every frame, and adds the same term across consecutive frames on
flow-linked superpixel pairs. Minimizing it jointly and keeping only the
center frame's labels transfers evidence through time: one-frame glitches
get voted out by their past and future counterparts.

Per-frame artifacts (superpixels, histograms, adjacency, flow, stage-1
labels) are computed once per sequence and shared by all windows.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .flow import FlowField, TemporalLinks, estimate_flow, temporal_links
from .media import ClickLog, FrameSequence, MaskSequence
from .mrf import EnergyProblem, minimize
from .params import Params
from .superclick import (
    SuperclickLabeling,
    extract_superclicks,
    pairwise_weights,
    shift_clicks,
)
from .superpixels import (
    AdjacencyGraph,
    SuperpixelMap,
    build_adjacency,
    chi_square_cross,
    map_histograms,
    slic_segment,
)


@dataclass
class FrameArtifacts:
    spmap: SuperpixelMap
    adjacency: AdjacencyGraph
    histograms: np.ndarray  # (n_S, 3*bins)
    edge_weights: np.ndarray  # aligned with adjacency.pairs


@dataclass
class SequenceArtifacts:
    frames: list[FrameArtifacts]
    flows: list[FlowField]  # flows[t] maps frame t -> t+1
    links: list[TemporalLinks]
    link_weights: list[np.ndarray]  # aligned with links[t].pairs

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class WindowProblem:
    """One assembled window energy: frames [t0, t1], center frame t, and the
    bijection (frame, superpixel) -> MRF node via per-frame offsets."""

    t: int
    t0: int
    t1: int
    offsets: list[int]
    problem: EnergyProblem

    def node(self, tau: int, superpixel_id: int) -> int:
        return self.offsets[tau - self.t0] + superpixel_id

    def center_slice(self) -> slice:
        i = self.t - self.t0
        start = self.offsets[i]
        stop = (
            self.offsets[i + 1]
            if i + 1 < len(self.offsets)
            else self.problem.n_nodes
        )
        return slice(start, stop)


def _frame_artifacts(frame: np.ndarray, params: Params) -> FrameArtifacts:
    h, w = frame.shape[:2]
    spmap = slic_segment(
        frame, params.slic_target_for(w, h), params.slic_compactness
    )
    adj = build_adjacency(spmap)
    hists = map_histograms(frame, spmap, params.histogram_bins)
    weights = pairwise_weights(hists, adj.pairs, params.beta1)
    return FrameArtifacts(
        spmap=spmap, adjacency=adj, histograms=hists, edge_weights=weights
    )


def compute_artifacts(
    sequence: FrameSequence, params: Params, jobs: int | None = None
) -> SequenceArtifacts:
    """All click-independent per-frame and per-boundary data, computed once."""
    n = len(sequence)
    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            frames = list(
                pool.map(lambda i: _frame_artifacts(sequence.frame(i), params), range(n))
            )
            flows = list(
                pool.map(
                    lambda t: estimate_flow(sequence.frame(t), sequence.frame(t + 1)),
                    range(n - 1),
                )
            )
    else:
        frames = [_frame_artifacts(sequence.frame(i), params) for i in range(n)]
        flows = [
            estimate_flow(sequence.frame(t), sequence.frame(t + 1))
            for t in range(n - 1)
        ]
    links = [
        temporal_links(frames[t].spmap, frames[t + 1].spmap, flows[t])
        for t in range(n - 1)
    ]
    link_weights = [
        np.exp(
            -params.beta1
            * chi_square_cross(
                frames[t].histograms, frames[t + 1].histograms, links[t].pairs
            )
        )
        for t in range(n - 1)
    ]
    return SequenceArtifacts(
        frames=frames, flows=flows, links=links, link_weights=link_weights
    )


def stage1_labelings(
    sequence: FrameSequence,
    clicklog: ClickLog,
    params: Params,
    artifacts: SequenceArtifacts | None = None,
) -> list[SuperclickLabeling]:
    """Superclick extraction for every frame, after the click-delay shift."""
    if artifacts is None:
        artifacts = compute_artifacts(sequence, params)
    shifted = shift_clicks(clicklog, params.click_delay)
    by_frame: dict[int, list] = {}
    for c in shifted.clicks:
        by_frame.setdefault(c.frame_index, []).append(c)
    out = []
    for t in range(len(sequence)):
        fa = artifacts.frames[t]
        out.append(
            extract_superclicks(
                sequence.frame(t),
                fa.spmap,
                fa.adjacency,
                by_frame.get(t, []),
                params,
                histograms=fa.histograms,
                edge_weights=fa.edge_weights,
            )
        )
    return out


def w1_cost(l_s: int, l_s_tau: int, params: Params) -> float:
    """Constant agree/disagree cost against the stage-1 decision."""
    return params.gamma1 if l_s == l_s_tau else params.gamma2


def build_E2(
    artifacts: SequenceArtifacts,
    stage1: list[SuperclickLabeling],
    t: int,
    params: Params,
) -> WindowProblem:
    """Assemble the window energy centered on frame t (truncated at ends)."""
    n_frames = len(artifacts)
    t0 = max(0, t - params.t_window)
    t1 = min(n_frames - 1, t + params.t_window)

    offsets = []
    total = 0
    for tau in range(t0, t1 + 1):
        offsets.append(total)
        total += artifacts.frames[tau].spmap.n_superpixels

    unary = np.empty((total, 2))
    parts: list[np.ndarray] = []
    for tau in range(t0, t1 + 1):
        off = offsets[tau - t0]
        labels = stage1[tau].labels
        n_s = len(labels)
        agree = params.alpha2 * params.gamma1
        disagree = params.alpha2 * params.gamma2
        unary[off : off + n_s, 0] = np.where(labels == 0, agree, disagree)
        unary[off : off + n_s, 1] = np.where(labels == 1, agree, disagree)
        fa = artifacts.frames[tau]
        if fa.adjacency.pairs.size:
            parts.append(
                np.column_stack(
                    [fa.adjacency.pairs.astype(np.float64) + off, fa.edge_weights]
                )
            )

    for tau in range(t0, t1):
        off_a = offsets[tau - t0]
        off_b = offsets[tau + 1 - t0]
        link_pairs = artifacts.links[tau].pairs
        if link_pairs.size:
            parts.append(
                np.column_stack(
                    [
                        link_pairs[:, 0].astype(np.float64) + off_a,
                        link_pairs[:, 1].astype(np.float64) + off_b,
                        artifacts.link_weights[tau],
                    ]
                )
            )

    pairwise = np.concatenate(parts) if parts else np.zeros((0, 3))
    return WindowProblem(
        t=t,
        t0=t0,
        t1=t1,
        offsets=offsets,
        problem=EnergyProblem(n_nodes=total, unary=unary, pairwise=pairwise),
    )


def render_labels(spmap: SuperpixelMap, labels: np.ndarray) -> np.ndarray:
    """Paint per-superpixel labels back onto the pixel grid."""
    return np.asarray(labels, dtype=bool)[spmap.labels]


def smooth_segment(
    sequence: FrameSequence,
    clicklog: ClickLog,
    params: Params,
    artifacts: SequenceArtifacts | None = None,
    jobs: int | None = None,
) -> MaskSequence:
    """Full pipeline: stage-1 superclicks, then one window solve per frame."""
    if len(sequence) == 0:
        raise ValueError("sequence must contain at least one frame")
    if artifacts is None:
        artifacts = compute_artifacts(sequence, params, jobs=jobs)
    stage1 = stage1_labelings(sequence, clicklog, params, artifacts)
    masks = np.zeros((len(sequence), sequence.height, sequence.width), dtype=bool)
    for t in range(len(sequence)):
        window = build_E2(artifacts, stage1, t, params)
        result = minimize(window.problem)
        center = result.labeling[window.center_slice()]
        masks[t] = render_labels(artifacts.frames[t].spmap, center)
    return MaskSequence(masks=masks)


def segment_stage1(
    sequence: FrameSequence,
    clicklog: ClickLog,
    params: Params,
    artifacts: SequenceArtifacts | None = None,
) -> MaskSequence:
    """Masks straight from stage-1 superclicks, no temporal smoothing."""
    if artifacts is None:
        artifacts = compute_artifacts(sequence, params)
    stage1 = stage1_labelings(sequence, clicklog, params, artifacts)
    masks = np.zeros((len(sequence), sequence.height, sequence.width), dtype=bool)
    for t in range(len(sequence)):
        masks[t] = render_labels(artifacts.frames[t].spmap, stage1[t].labels)
    return MaskSequence(masks=masks)
