"""The game service, exercised over real HTTP.

Builds a level directory on disk, serves it, then plays a few clicks the
way the browser game would: open a session, fetch frames, post clicks,
complete the level, read the leaderboard.
"""

import tempfile
import threading
from pathlib import Path

import httpx
import numpy as np
import uvicorn

from clickseg.evaluation import synthetic_scene
from clickseg.media import write_frame_sequence
from clickseg.service import build_service, create_app

root = Path(tempfile.mkdtemp(prefix="clickseg-demo-"))
seq, gt = synthetic_scene(n_frames=12, height=90, width=120, n_objects=2, seed=5)
write_frame_sequence(seq, root / "levels" / "reef" / "frames")
print(f"level directory: {root / 'levels'}")

service = build_service(root / "levels", root / "clicks.jsonl")
config = uvicorn.Config(
    create_app(service), host="127.0.0.1", port=8765, log_level="warning"
)
server = uvicorn.Server(config)
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    pass

base = "http://127.0.0.1:8765/api/v1"
with httpx.Client() as client:
    levels = client.get(f"{base}/levels").json()
    print(f"levels: {levels}")

    token = client.post(
        f"{base}/sessions", json={"user": "demo", "level": "reef"}
    ).json()["token"]

    png = client.get(f"{base}/levels/reef/frames/0", params={"session": token})
    print(f"frame 0: {len(png.content)} bytes of PNG")

    ys, xs = np.nonzero(gt.mask(0))
    hit = client.post(
        f"{base}/clicks",
        json={"session": token, "frame": 0, "x": int(xs[0]), "y": int(ys[0])},
    ).json()
    miss = client.post(
        f"{base}/clicks", json={"session": token, "frame": 0, "x": 1, "y": 1}
    ).json()
    print(f"click on object: {hit}")
    print(f"click on nothing: {miss}")

    done = client.post(
        f"{base}/levels/reef/complete", params={"session": token}
    ).json()
    print(f"level complete: {done}")
    print(f"leaderboard: {client.get(f'{base}/leaderboard').json()}")
    print(f"click log lines: {len((root / 'clicks.jsonl').read_text().splitlines())}")

server.should_exit = True
thread.join(timeout=5)
