import numpy as np
import pytest

from clickseg.evaluation import gt_point_clicks, synthetic_scene
from clickseg.flow import TemporalLinks
from clickseg.media import Click, ClickLog, FrameSequence
from clickseg.mrf import evaluate, minimize
from clickseg.params import Params
from clickseg.superclick import SuperclickLabeling
from clickseg.superpixels import build_adjacency, superpixel_map_from_labels
from clickseg.temporal import (
    FrameArtifacts,
    SequenceArtifacts,
    build_E2,
    compute_artifacts,
    render_labels,
    segment_stage1,
    smooth_segment,
    stage1_labelings,
    w1_cost,
)

from helpers import enumerate_minimum


def _click(frame, x, y):
    return Click(frame_index=frame, x=x, y=y, user_id="u", level_id="l")


def _band_frame_artifacts(n_sp, h=4, w_per=4, weights=None):
    """One frame of `n_sp` vertical bands with fabricated edge weights."""
    labels = np.repeat(np.arange(n_sp, dtype=np.int32), w_per)[None, :].repeat(h, 0)
    spm = superpixel_map_from_labels(labels)
    adj = build_adjacency(spm)
    if weights is None:
        weights = np.ones(len(adj.pairs))
    hist = np.tile(np.eye(1, 24), (n_sp, 1))
    return FrameArtifacts(
        spmap=spm, adjacency=adj, histograms=hist, edge_weights=np.asarray(weights)
    )


def _chain(frames, links, link_weights):
    return SequenceArtifacts(
        frames=frames, flows=[None] * len(links), links=links,
        link_weights=link_weights,
    )


def _stage1(labels_per_frame):
    return [
        SuperclickLabeling(
            labels=np.asarray(l, dtype=np.uint8), p_fg=np.zeros(len(l))
        )
        for l in labels_per_frame
    ]


def test_w1_costs():
    params = Params()
    assert w1_cost(1, 1, params) == pytest.approx(0.1)
    assert w1_cost(0, 1, params) == pytest.approx(0.9)
    assert w1_cost(1, 0, params) == pytest.approx(0.9)
    assert w1_cost(0, 0, params) == pytest.approx(0.1)


def test_build_E2_single_frame_window():
    params = Params(t_window=0)
    art = _chain([_band_frame_artifacts(3)], [], [])
    stage1 = _stage1([[1, 0, 1]])
    window = build_E2(art, stage1, 0, params)
    assert window.problem.n_nodes == 3
    assert len(window.problem.pairwise) == 2  # intra-frame only
    # agree cost alpha2*gamma1, disagree alpha2*gamma2, oriented by stage 1
    a, d = params.alpha2 * params.gamma1, params.alpha2 * params.gamma2
    assert window.problem.unary[0].tolist() == pytest.approx([d, a])
    assert window.problem.unary[1].tolist() == pytest.approx([a, d])


def test_all_foreground_stage1_stays_foreground():
    params = Params(t_window=2)
    frames = [_band_frame_artifacts(3) for _ in range(2)]
    links = [TemporalLinks(pairs=np.array([[i, i] for i in range(3)], dtype=np.int32))]
    art = _chain(frames, links, [np.ones(3)])
    stage1 = _stage1([[1, 1, 1], [1, 1, 1]])
    window = build_E2(art, stage1, 0, params)
    result = minimize(window.problem)
    assert result.labeling.tolist() == [1] * 6
    best, meet = enumerate_minimum(window.problem)
    assert result.energy == pytest.approx(best, abs=1e-12)


def test_temporal_edge_forces_agreement_on_conflict():
    # Two single-superpixel frames with conflicting stage-1 labels and a
    # unit-weight temporal link: agreement is cheaper when
    # alpha2 * (gamma2 - gamma1) < 1, and the tie breaks to background.
    params = Params()
    frames = [_band_frame_artifacts(1), _band_frame_artifacts(1)]
    links = [TemporalLinks(pairs=np.array([[0, 0]], dtype=np.int32))]
    art = _chain(frames, links, [np.array([1.0])])
    stage1 = _stage1([[1], [0]])
    window = build_E2(art, stage1, 0, params)
    result = minimize(window.problem)
    assert result.labeling.tolist() == [0, 0]
    best, meet = enumerate_minimum(window.problem)
    assert meet.tolist() == [0, 0]
    assert result.energy == pytest.approx(best, abs=1e-12)


def test_window_node_mapping_is_bijective():
    params = Params(t_window=1)
    frames = [_band_frame_artifacts(2), _band_frame_artifacts(3),
              _band_frame_artifacts(2)]
    links = [
        TemporalLinks(pairs=np.array([[0, 0]], dtype=np.int32)),
        TemporalLinks(pairs=np.array([[0, 0]], dtype=np.int32)),
    ]
    art = _chain(frames, links, [np.array([1.0]), np.array([1.0])])
    stage1 = _stage1([[0, 0], [0, 0, 0], [0, 0]])
    window = build_E2(art, stage1, 1, params)
    assert window.problem.n_nodes == 7
    seen = set()
    for tau in range(window.t0, window.t1 + 1):
        for s in range(art.frames[tau].spmap.n_superpixels):
            node = window.node(tau, s)
            assert 0 <= node < 7
            seen.add(node)
    assert len(seen) == 7
    assert window.center_slice() == slice(2, 5)


def _tiny_scene(n_frames=3, seed=0):
    seq, gt = synthetic_scene(
        n_frames=n_frames, height=24, width=32, n_objects=1, seed=seed,
        min_size=10, max_size=12,
    )
    return seq, gt


def test_single_frame_sequence_equals_stage1():
    seq, gt = _tiny_scene(n_frames=1)
    params = Params(click_delay=0, slic_target=12)
    log = gt_point_clicks(gt, pixels_per_click=30)
    arts = compute_artifacts(seq, params)
    out = smooth_segment(seq, log, params, artifacts=arts)
    s1 = segment_stage1(seq, log, params, artifacts=arts)
    assert np.array_equal(out.masks, s1.masks)


_SQUARE_CLICK_POINTS = [(14, 12), (20, 13), (26, 13), (14, 19), (20, 20), (26, 20)]


def _static_square_sequence(n_frames=5, h=32, w=40):
    frames = np.full((n_frames, h, w, 3), 60, dtype=np.uint8)
    frames[:, 10:22, 12:28] = (210, 40, 40)
    expected = np.zeros((h, w), dtype=bool)
    expected[10:22, 12:28] = True
    return FrameSequence(frames=frames), expected


def test_static_clicked_square_stable_over_time():
    # Static scene: one bright square, every frame clicked inside it.
    seq, expected = _static_square_sequence()
    clicks = [_click(t, x, y) for t in range(5) for x, y in _SQUARE_CLICK_POINTS]
    params = Params(click_delay=0, slic_target=60)
    out = smooth_segment(seq, ClickLog(clicks=clicks), params)
    for t in range(5):
        inter = (out.mask(t) & expected).sum()
        union = (out.mask(t) | expected).sum()
        assert inter / union > 0.8


def test_unclicked_frame_recovers_from_neighbors():
    seq, expected = _static_square_sequence()
    clicks = [
        _click(t, x, y) for t in (0, 1, 3, 4) for x, y in _SQUARE_CLICK_POINTS
    ]  # frame 2 gets nothing
    params = Params(click_delay=0, slic_target=60)
    arts = compute_artifacts(seq, params)
    s1 = segment_stage1(seq, ClickLog(clicks=clicks), params, artifacts=arts)
    out = smooth_segment(seq, ClickLog(clicks=clicks), params, artifacts=arts)
    assert not s1.mask(2).any()  # stage 1 alone has nothing on frame 2
    inter = (out.mask(2) & expected).sum()
    union = (out.mask(2) | expected).sum()
    assert inter / union > 0.8  # transferred through the window


def test_window_truncation_covers_all_frames():
    seq, gt = _tiny_scene(n_frames=4)
    params = Params(click_delay=0, t_window=2, slic_target=10)
    log = gt_point_clicks(gt, pixels_per_click=20)
    out = smooth_segment(seq, log, params)
    assert len(out) == len(seq)


def test_rendered_mask_counts_match_labels():
    seq, gt = _tiny_scene(n_frames=2, seed=3)
    params = Params(click_delay=0, slic_target=10)
    log = gt_point_clicks(gt, pixels_per_click=20)
    arts = compute_artifacts(seq, params)
    stage1 = stage1_labelings(seq, log, params, arts)
    for t in range(len(seq)):
        mask = render_labels(arts.frames[t].spmap, stage1[t].labels)
        expected = sum(
            s.pixel_count
            for s in arts.frames[t].spmap.superpixels
            if stage1[t].labels[s.id]
        )
        assert int(mask.sum()) == expected


def test_smooth_segment_matches_enumeration_small():
    # Whole-window brute force on a tiny sequence.
    rng = np.random.default_rng(31)
    seq, gt = _tiny_scene(n_frames=3, seed=8)
    params = Params(click_delay=0, t_window=2, slic_target=4)
    arts = compute_artifacts(seq, params)
    total = sum(f.spmap.n_superpixels for f in arts.frames)
    if total > 18:
        pytest.skip("superpixel count too large for enumeration")
    log = gt_point_clicks(gt, pixels_per_click=40)
    stage1 = stage1_labelings(seq, log, params, arts)
    out = smooth_segment(seq, log, params, artifacts=arts)
    for t in range(3):
        window = build_E2(arts, stage1, t, params)
        best, meet = enumerate_minimum(window.problem)
        center = meet[window.center_slice()]
        assert np.array_equal(
            out.mask(t), render_labels(arts.frames[t].spmap, center)
        )
