"""Frame, mask and click-log persistence.

Frames and masks are directories of zero-padded numbered PNGs; click logs
are newline-delimited JSON records. This module is the only place the rest
of the pipeline touches the filesystem.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    CoordinateRangeError,
    DecodeError,
    DimensionMismatchError,
    NoFramesError,
    ParseError,
    WriteError,
)

# Canonical click-record keys; anything else is preserved verbatim in `extra`.
_KNOWN_KEYS = ("user", "level", "frame", "x", "y", "quality", "t_ms")


@dataclass
class FrameSequence:
    """An ordered stack of RGB frames, all the same size."""

    frames: np.ndarray  # (n, h, w, 3) uint8
    frame_rate: float = 10.0

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.uint8)
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3:
            raise DimensionMismatchError(
                f"expected (n, h, w, 3) frame stack, got {self.frames.shape}"
            )

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    def frame(self, index: int) -> np.ndarray:
        return self.frames[index]


@dataclass
class MaskSequence:
    """Binary foreground masks aligned to a FrameSequence."""

    masks: np.ndarray  # (n, h, w) bool

    def __post_init__(self):
        self.masks = np.asarray(self.masks).astype(bool)
        if self.masks.ndim != 3:
            raise DimensionMismatchError(
                f"expected (n, h, w) mask stack, got {self.masks.shape}"
            )

    def __len__(self) -> int:
        return self.masks.shape[0]

    @property
    def height(self) -> int:
        return self.masks.shape[1]

    @property
    def width(self) -> int:
        return self.masks.shape[2]

    def mask(self, index: int) -> np.ndarray:
        return self.masks[index]


@dataclass
class Click:
    """One user click on one frame."""

    frame_index: int
    x: int
    y: int
    user_id: str
    level_id: str
    quality: float = 1.0
    t_ms: int | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class ClickLog:
    clicks: list[Click]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.clicks)

    def for_frame(self, frame_index: int) -> list[Click]:
        return [c for c in self.clicks if c.frame_index == frame_index]

    def validate_bounds(self, width: int, height: int) -> None:
        for c in self.clicks:
            if not (0 <= c.x < width and 0 <= c.y < height):
                raise CoordinateRangeError(
                    f"click ({c.x}, {c.y}) outside {width}x{height} frame"
                )


def _numbered_pngs(path: Path) -> list[tuple[int, Path]]:
    entries = []
    for p in sorted(path.glob("*.png")):
        try:
            entries.append((int(p.stem), p))
        except ValueError:
            continue  # non-numbered files are not frames
    entries.sort(key=lambda e: e[0])
    return entries


def _decode(p: Path, mode: str) -> np.ndarray:
    try:
        with Image.open(p) as img:
            return np.asarray(img.convert(mode))
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"cannot decode {p}: {exc}") from exc


def load_frame_sequence(path: str | Path, frame_rate: float = 10.0) -> FrameSequence:
    """Load `NNN.png` frames from a directory, ordered by numeric index."""
    entries = _numbered_pngs(Path(path))
    if not entries:
        raise NoFramesError(f"no numbered .png frames in {path}")
    arrays = [_decode(p, "RGB") for _, p in entries]
    shape = arrays[0].shape
    for (idx, p), a in zip(entries, arrays):
        if a.shape != shape:
            raise DimensionMismatchError(
                f"{p} is {a.shape[1]}x{a.shape[0]}, expected {shape[1]}x{shape[0]}"
            )
    return FrameSequence(frames=np.stack(arrays), frame_rate=frame_rate)


def read_mask_sequence(path: str | Path) -> MaskSequence:
    """Load `NNN.png` grayscale masks; any value above 127 is foreground."""
    entries = _numbered_pngs(Path(path))
    if not entries:
        raise NoFramesError(f"no numbered .png masks in {path}")
    arrays = [_decode(p, "L") for _, p in entries]
    shape = arrays[0].shape
    for (idx, p), a in zip(entries, arrays):
        if a.shape != shape:
            raise DimensionMismatchError(f"{p} is {a.shape}, expected {shape}")
    return MaskSequence(masks=np.stack(arrays) > 127)


def _index_width(count: int) -> int:
    return max(3, len(str(max(count - 1, 0))))


def encode_mask_png(mask: np.ndarray) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(
        buf, format="PNG"
    )
    return buf.getvalue()


def encode_frame_png(frame: np.ndarray) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(np.asarray(frame, dtype=np.uint8), mode="RGB").save(
        buf, format="PNG"
    )
    return buf.getvalue()


def write_mask_sequence(masks: MaskSequence, path: str | Path) -> None:
    """Write one 0/255 grayscale PNG per mask; load(write(m)) == m."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        width = _index_width(len(masks))
        for i in range(len(masks)):
            (out / f"{i:0{width}d}.png").write_bytes(encode_mask_png(masks.mask(i)))
    except OSError as exc:
        raise WriteError(f"cannot write masks to {out}: {exc}") from exc


def write_frame_sequence(seq: FrameSequence, path: str | Path) -> None:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        width = _index_width(len(seq))
        for i in range(len(seq)):
            (out / f"{i:0{width}d}.png").write_bytes(encode_frame_png(seq.frame(i)))
    except OSError as exc:
        raise WriteError(f"cannot write frames to {out}: {exc}") from exc


def _click_from_record(rec: dict, line_no: int) -> Click:
    if not isinstance(rec, dict):
        raise ParseError(line_no, "record is not a JSON object")
    for key in ("user", "level", "frame", "x", "y"):
        if key not in rec:
            raise ParseError(line_no, f"missing field {key!r}")
    try:
        frame = int(rec["frame"])
        x = int(rec["x"])
        y = int(rec["y"])
    except (TypeError, ValueError) as exc:
        raise ParseError(line_no, f"non-integer coordinate: {exc}") from exc
    if frame < 0:
        raise ParseError(line_no, f"negative frame index {frame}")
    quality = 1.0
    if rec.get("quality") is not None:
        try:
            quality = float(rec["quality"])
        except (TypeError, ValueError) as exc:
            raise ParseError(line_no, f"bad quality: {exc}") from exc
        if not 0.0 <= quality <= 1.0:
            raise ParseError(line_no, f"quality {quality} outside [0, 1]")
    t_ms = None
    if rec.get("t_ms") is not None:
        try:
            t_ms = int(rec["t_ms"])
        except (TypeError, ValueError) as exc:
            raise ParseError(line_no, f"bad t_ms: {exc}") from exc
    extra = {k: v for k, v in rec.items() if k not in _KNOWN_KEYS}
    return Click(
        frame_index=frame,
        x=x,
        y=y,
        user_id=str(rec["user"]),
        level_id=str(rec["level"]),
        quality=quality,
        t_ms=t_ms,
        extra=extra,
    )


def click_to_record(click: Click) -> dict:
    rec = {
        "user": click.user_id,
        "level": click.level_id,
        "frame": click.frame_index,
        "x": click.x,
        "y": click.y,
        "quality": click.quality,
    }
    if click.t_ms is not None:
        rec["t_ms"] = click.t_ms
    rec.update(click.extra)
    return rec


def read_click_log(path: str | Path) -> ClickLog:
    """Parse a newline-delimited JSON click log."""
    p = Path(path)
    clicks: list[Click] = []
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        return ClickLog(clicks=[], provenance=str(p))
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(line_no, f"invalid JSON: {exc}") from exc
        clicks.append(_click_from_record(rec, line_no))
    return ClickLog(clicks=clicks, provenance=str(p))


def append_clicks(log_path: str | Path, new_clicks: list[Click]) -> int:
    """Append clicks as whole lines, fsynced before returning the count."""
    if not new_clicks:
        return 0
    payload = "".join(
        json.dumps(click_to_record(c), separators=(",", ":")) + "\n"
        for c in new_clicks
    )
    try:
        with open(log_path, "a", encoding="utf-8") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
    except OSError as exc:
        raise WriteError(f"cannot append to {log_path}: {exc}") from exc
    return len(new_clicks)


def rewrite_click_log(log_path: str | Path, clicks: list[Click]) -> None:
    """Atomically replace the log (temp file + rename); used for quality stamping."""
    p = Path(log_path)
    payload = "".join(
        json.dumps(click_to_record(c), separators=(",", ":")) + "\n" for c in clicks
    )
    tmp = p.with_suffix(p.suffix + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, p)
    except OSError as exc:
        raise WriteError(f"cannot rewrite {p}: {exc}") from exc
