"""Game mechanics walkthrough: points, penalties, streaks and quality.

Plays a short scripted session against a bootstrap segmentation of a
moving-square video and narrates every score change.
"""

import numpy as np

from clickseg.game import (
    SessionState,
    apply_click,
    bootstrap_segmentation,
    click_quality,
    required_points,
)
from clickseg.media import Click, FrameSequence

# A bright square marching across a dark frame; motion alone is enough to
# bootstrap a score segmentation before any clicks exist.
h, w = 240, 320
frames = np.zeros((6, h, w, 3), dtype=np.uint8)
for t in range(6):
    x = 10 + 45 * t
    frames[t, 100:140, x : x + 40] = 220
seg = bootstrap_segmentation(FrameSequence(frames=frames))
areas = [int(seg.masks.mask(t).sum()) for t in range(6)]
print(f"bootstrap foreground pixels per frame: {areas}")

print(f"\nlevel 1 needs {required_points(1)} points, level 2 {required_points(2)}")


def play(state, frame, x, y, note):
    click = Click(frame_index=frame, x=x, y=y, user_id="demo", level_id="l1")
    state, delta = apply_click(state, click, seg)
    print(f"  click {note:<28} -> {delta:+5d}  (score {state.score})")
    return state, click


state = SessionState()
clicks = []
cx = 10 + 45 * 2 + 20
state, c = play(state, 2, cx, 120, "on the square")
clicks.append(c)
state, c = play(state, 2, cx + 4, 121, "same spot again (decays)")
clicks.append(c)
state, c = play(state, 2, cx + 5, 119, "and again")
clicks.append(c)
state, c = play(state, 2, 319, 0, "far corner (penalty)")
clicks.append(c)
state, c = play(state, 2, 319, 1, "far again (escalates)")
clicks.append(c)
state, c = play(state, 2, cx, 125, "back on target (streak reset)")
clicks.append(c)

quality = click_quality(clicks, seg)
print(f"\nsession quality: {quality:.2f} of clicks hit the score segmentation")
