"""End-to-end segmentation from noisy clicks.

Simulates sloppy players on a synthetic two-object scene, runs the
two-stage pipeline, and compares the stage-1 output against the temporally
smoothed result. Masks land in demos/out/.
"""

from pathlib import Path

from clickseg.evaluation import ClickerProfile, pom, prf, simulate_users, synthetic_scene
from clickseg.media import write_mask_sequence
from clickseg.params import Params
from clickseg.temporal import compute_artifacts, segment_stage1, smooth_segment

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

seq, gt = synthetic_scene(n_frames=20, height=90, width=120, n_objects=2, seed=11)
profile = ClickerProfile(
    clicks_per_frame_rate=8.0,
    spatial_sigma=8.0,   # sloppy aim
    reaction_delay=2,    # late by two frames
    miss_rate=0.15,      # some clicks are plain wrong
    target_bias=1.0,
    seed=0,
)
log = simulate_users(gt, profile, n_users=2, level_id="demo", seed=0)
print(f"simulated {len(log)} clicks from 2 players over {len(seq)} frames")

params = Params()  # click_delay=2 undoes the simulated reaction delay
artifacts = compute_artifacts(seq, params)

stage1 = segment_stage1(seq, log, params, artifacts=artifacts)
smooth = smooth_segment(seq, log, params, artifacts=artifacts)

for name, masks in (("stage 1 alone", stage1), ("with smoothing", smooth)):
    pr, rec, f1 = prf(masks, gt)
    print(f"{name:>15}: Pr={pr:.3f} Rec={rec:.3f} F1={f1:.3f} POM={pom(masks, gt):.3f}")

write_mask_sequence(smooth, out_dir / "pipeline_masks")
print(f"masks written to {out_dir / 'pipeline_masks'}")
