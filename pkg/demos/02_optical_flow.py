"""Dense optical flow and superpixel temporal links.

Estimates motion between two frames of a moving scene, checks it against
the known object velocity, and shows how flow turns into the sparse
superpixel-to-superpixel links the temporal energy uses.
"""

import numpy as np

from clickseg.evaluation import synthetic_scene
from clickseg.flow import estimate_flow, temporal_links
from clickseg.superpixels import slic_segment

seq, gt = synthetic_scene(
    n_frames=2, height=90, width=120, n_objects=1, seed=3,
    min_speed=3, max_speed=3,
)
f0, f1 = seq.frame(0), seq.frame(1)

flow = estimate_flow(f0, f1)
moving = gt.mask(0)
print(f"object flow:     ({flow.dx[moving].mean():+.2f}, {flow.dy[moving].mean():+.2f}) px")
print(f"background flow: ({flow.dx[~moving].mean():+.2f}, {flow.dy[~moving].mean():+.2f}) px")

map0 = slic_segment(f0, 200)
map1 = slic_segment(f1, 200)
links = temporal_links(map0, map1, flow)
print(f"{len(links)} temporal links between {map0.n_superpixels} and "
      f"{map1.n_superpixels} superpixels")

# A static region links mostly to itself-shaped regions; the moving object
# links to where it went.
fan_out = np.bincount(links.pairs[:, 0], minlength=map0.n_superpixels)
print(f"links per source superpixel: mean {fan_out.mean():.1f}, max {fan_out.max()}")
