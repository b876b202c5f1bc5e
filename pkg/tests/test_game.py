import numpy as np
import pytest

from clickseg.errors import NeedMoreFramesError
from clickseg.game import (
    FarMiss,
    Hit,
    NearMiss,
    ScoreSegmentation,
    SessionState,
    apply_click,
    award_points,
    bootstrap_segmentation,
    classify_click,
    click_quality,
    ior_blur_map,
    ior_density,
    leaderboard_csv,
    penalty,
    required_points,
)
from clickseg.media import Click, FrameSequence, MaskSequence


def _click(x, y, frame=0):
    return Click(frame_index=frame, x=x, y=y, user_id="u", level_id="l")


def _segmentation(mask):
    return ScoreSegmentation(MaskSequence(masks=mask[None, :, :]))


def test_award_points_formula():
    assert award_points(2000, 0) == 100
    assert award_points(2000, 5) == 50
    assert award_points(2000, 12) == 0  # formula goes negative, clamped
    assert award_points(1000, 0) == 50


def test_penalty_formula():
    assert penalty(1) == 20
    assert penalty(3) == 60
    assert penalty(10) == 200


def test_required_points_affine():
    assert required_points(1) == 4000
    assert required_points(2) == 6000
    for k in range(1, 10):
        assert required_points(k + 1) - required_points(k) == 2000


def test_classify_hit_with_area():
    mask = np.zeros((64, 64), dtype=bool)
    mask[10:50, 10:60] = True  # 40x50 = 2000 px
    seg = _segmentation(mask)
    out = classify_click(_click(20, 20), seg)
    assert isinstance(out, Hit)
    assert out.area == 2000


def test_classify_far_miss_strict_threshold():
    mask = np.zeros((300, 300), dtype=bool)
    mask[0, 0] = True
    seg = _segmentation(mask)
    assert isinstance(classify_click(_click(0, 201), seg), FarMiss)  # d = 201
    assert isinstance(classify_click(_click(0, 200), seg), NearMiss)  # d = 200


def test_classify_near_miss_between():
    mask = np.zeros((300, 300), dtype=bool)
    mask[100:110, 100:110] = True
    seg = _segmentation(mask)
    assert isinstance(classify_click(_click(150, 105), seg), NearMiss)


def test_classify_empty_foreground_is_far_miss():
    seg = _segmentation(np.zeros((20, 20), dtype=bool))
    assert isinstance(classify_click(_click(5, 5), seg), FarMiss)


def test_classify_exhaustive_exclusive():
    rng = np.random.default_rng(2)
    mask = np.zeros((260, 260), dtype=bool)
    mask[10:30, 10:30] = True
    seg = _segmentation(mask)
    for _ in range(200):
        c = _click(int(rng.integers(0, 260)), int(rng.integers(0, 260)))
        out = classify_click(c, seg)
        assert isinstance(out, (Hit, NearMiss, FarMiss))


def test_apply_click_fresh_hit():
    mask = np.zeros((64, 64), dtype=bool)
    mask[0:25, 0:40] = True  # 1000 px
    seg = _segmentation(mask)
    state, delta = apply_click(SessionState(), _click(5, 5), seg)
    assert delta == 50
    assert state.score == 50
    assert state.t_plus == 1
    assert state.t_minus == 0


def test_apply_click_far_miss_escalation():
    seg = _segmentation(np.zeros((20, 20), dtype=bool))  # everything far
    state = SessionState()
    deltas = []
    for _ in range(3):
        state, d = apply_click(state, _click(1, 1), seg)
        deltas.append(d)
    assert deltas == [-20, -40, -60]
    assert state.score == -120
    assert state.t_plus == 0


def test_apply_click_repeat_in_region_decays():
    mask = np.zeros((64, 64), dtype=bool)
    mask[0:25, 0:40] = True  # 1000 px
    seg = _segmentation(mask)
    state = SessionState()
    state, d1 = apply_click(state, _click(5, 5), seg)
    state, d2 = apply_click(state, _click(7, 6), seg)  # inside 30x30 box
    assert (d1, d2) == (50, 45)  # second click pays (1 - 1/10)


def test_apply_click_outside_region_resets():
    mask = np.zeros((80, 80), dtype=bool)
    mask[0:40, 0:25] = True  # 1000 px, tall
    seg = _segmentation(mask)
    state = SessionState()
    state, d1 = apply_click(state, _click(5, 5), seg)
    state, d2 = apply_click(state, _click(5, 36), seg)  # 31 px away: outside
    assert d1 == d2 == 50
    assert state.t_plus == 1
    assert state.anchor == (5, 36)


def test_apply_click_near_miss_freezes_hit_streak():
    mask = np.zeros((300, 300), dtype=bool)
    mask[0:40, 0:25] = True
    seg = _segmentation(mask)
    state = SessionState()
    state, _ = apply_click(state, _click(5, 5), seg)
    t_plus_before = state.t_plus
    state, d = apply_click(state, _click(100, 100), seg)  # near miss
    assert d == 0
    assert state.t_plus == t_plus_before
    assert state.t_minus == 0


def test_apply_click_near_miss_breaks_penalty_streak():
    mask = np.zeros((600, 600), dtype=bool)
    mask[0:10, 0:10] = True
    seg = _segmentation(mask)
    state = SessionState()
    state, d1 = apply_click(state, _click(500, 500), seg)  # far miss
    state, d2 = apply_click(state, _click(50, 50), seg)  # near miss
    state, d3 = apply_click(state, _click(500, 500), seg)  # far miss again
    assert (d1, d2, d3) == (-20, 0, -20)


def test_apply_click_is_pure():
    mask = np.zeros((64, 64), dtype=bool)
    mask[0:25, 0:40] = True
    seg = _segmentation(mask)
    state = SessionState(score=10, t_plus=2, anchor=(5, 5), t_minus=0)
    a = apply_click(state, _click(6, 6), seg)
    b = apply_click(state, _click(6, 6), seg)
    assert a == b
    assert state.score == 10  # input untouched


def test_click_quality_fraction():
    mask = np.zeros((64, 64), dtype=bool)
    mask[0:32, :] = True
    seg = _segmentation(mask)
    clicks = [_click(5, 5)] * 7 + [_click(5, 40)] * 3
    assert click_quality(clicks, seg) == pytest.approx(0.7)


def test_click_quality_empty_is_one():
    seg = _segmentation(np.zeros((8, 8), dtype=bool))
    assert click_quality([], seg) == 1.0


def test_click_quality_all_misses_zero():
    seg = _segmentation(np.zeros((600, 600), dtype=bool))
    clicks = [_click(300, 300)] * 5
    assert click_quality(clicks, seg) == 0.0


def test_ior_map_no_clicks():
    out = ior_blur_map([], 0, 32, 24)
    assert out.shape == (24, 32)
    assert not out.any()


def test_ior_map_single_click_peak():
    out = ior_blur_map([_click(100, 80)], 0, 200, 160)
    assert out[80, 100] == pytest.approx(1.0)
    assert out[80, 140] < out[80, 110] < out[80, 100]
    assert out[20, 20] < out[80, 100]


def test_ior_density_cluster_ratio():
    h, w = 80, 200
    clicks = [_click(30, 40) for _ in range(10)] + [
        _click(170, 40) for _ in range(20)
    ]
    dens = ior_density(clicks, 0, w, h, sigma=5.0)
    assert dens[40, 170] / dens[40, 30] == pytest.approx(2.0, rel=1e-3)


def test_ior_monotone_before_normalization():
    base = [_click(10, 10)] * 3
    more = base + [_click(30, 12)]
    d0 = ior_density(base, 0, 64, 48)
    d1 = ior_density(more, 0, 64, 48)
    assert (d1 >= d0 - 1e-12).all()


def test_ior_ignores_other_frames():
    clicks = [_click(10, 10, frame=1)]
    assert not ior_blur_map(clicks, 0, 32, 24).any()


def test_bootstrap_static_sequence_empty():
    frames = np.full((4, 24, 32, 3), 99, dtype=np.uint8)
    seg = bootstrap_segmentation(FrameSequence(frames=frames))
    assert not seg.masks.masks.any()


def test_bootstrap_moving_square_overlaps():
    h, w = 48, 96
    frames = np.zeros((5, h, w, 3), dtype=np.uint8)
    truth = np.zeros((5, h, w), dtype=bool)
    for t in range(5):
        x = 5 + 16 * t  # moves a full body-width each frame
        frames[t, 20:28, x : x + 8] = 255
        truth[t, 20:28, x : x + 8] = True
    seg = bootstrap_segmentation(FrameSequence(frames=frames))
    for t in range(1, 4):
        inter = (seg.masks.mask(t) & truth[t]).sum()
        union = (seg.masks.mask(t) | truth[t]).sum()
        assert inter / union >= 0.5


def test_bootstrap_single_frame_rejected():
    frames = np.zeros((1, 8, 8, 3), dtype=np.uint8)
    with pytest.raises(NeedMoreFramesError):
        bootstrap_segmentation(FrameSequence(frames=frames))


def test_leaderboard_csv_shape():
    text = leaderboard_csv([("alice", 8000, 3), ("bob", 6000, 5)])
    lines = text.strip().splitlines()
    assert lines[0] == "user,best_score,games_played"
    assert lines[1] == "alice,8000,3"
    assert len(lines) == 3
