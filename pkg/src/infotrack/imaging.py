"""Grayscale frames, binary PGM I/O, integral images, and sequence loading.

Frames hold intensities in [0, 1] quantized to 8 bits (k / 255), so a
load / save round trip is bit-identical. Sequences are directories of PGM
files ordered lexicographically, optionally paired with a ground-truth box
file (one ``x,y,w,h`` line per frame).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .geometry import BoundingBox, read_box_file


@dataclass
class Frame:
    """One grayscale frame; pixels is an (h, w) float64 array in [0, 1]."""

    pixels: np.ndarray

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_uint8(cls, raw: np.ndarray) -> "Frame":
        return cls(raw.astype(np.float64) / 255.0)

    def to_uint8(self) -> np.ndarray:
        return np.clip(np.rint(self.pixels * 255.0), 0, 255).astype(np.uint8)


def read_pgm(path: str) -> Frame:
    """Read a binary (P5) PGM with maxval 255.

    Header comments (# ...) between tokens are honored; any other magic
    number or maxval is rejected.
    """
    with open(path, "rb") as fh:
        data = fh.read()

    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"truncated PGM header: {path}")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise ValueError(f"not a binary PGM (magic {magic!r}): {path}")
    width = int(next_token())
    height = int(next_token())
    maxval = int(next_token())
    if maxval != 255:
        raise ValueError(f"unsupported PGM maxval {maxval} (need 255): {path}")
    pos += 1  # single whitespace byte before the raster
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise ValueError(f"truncated PGM raster: {path}")
    raw = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return Frame.from_uint8(raw)


def write_pgm(path: str, frame: Frame) -> None:
    """Write a binary (P5) PGM with maxval 255."""
    raw = frame.to_uint8()
    header = f"P5\n{frame.width} {frame.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(raw.tobytes())


@dataclass
class IntegralImage:
    """Summed-area table: (h+1, w+1) float64, first row and column zero."""

    table: np.ndarray

    @property
    def width(self) -> int:
        return self.table.shape[1] - 1

    @property
    def height(self) -> int:
        return self.table.shape[0] - 1


def integral(frame: Frame) -> IntegralImage:
    h, w = frame.pixels.shape
    table = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(frame.pixels, axis=0, out=table[1:, 1:])
    np.cumsum(table[1:, 1:], axis=1, out=table[1:, 1:])
    return IntegralImage(table)


def round_half_up(v: float) -> int:
    """Pixel rasterization rule used everywhere a real coordinate lands on the grid."""
    return int(math.floor(v + 0.5))


def pixel_bounds(box: BoundingBox, width: int, height: int) -> tuple[int, int, int, int]:
    """Rasterized, frame-clipped pixel bounds (x0, y0, x1, y1), end-exclusive.

    May be empty (x1 <= x0 or y1 <= y0) for boxes outside the frame.
    """
    x0 = round_half_up(min(max(box.x, 0.0), float(width)))
    y0 = round_half_up(min(max(box.y, 0.0), float(height)))
    x1 = round_half_up(min(max(box.x + box.w, 0.0), float(width)))
    y1 = round_half_up(min(max(box.y + box.h, 0.0), float(height)))
    return x0, y0, x1, y1


def rect_sum(ii: IntegralImage, box: BoundingBox) -> float:
    """Pixel sum over the rasterized, frame-clipped box (0 if fully outside)."""
    x0, y0, x1, y1 = pixel_bounds(box, ii.width, ii.height)
    if x1 <= x0 or y1 <= y0:
        return 0.0
    t = ii.table
    return float(t[y1, x1] - t[y0, x1] - t[y1, x0] + t[y0, x0])


@dataclass
class SequenceHandle:
    """An ordered list of frame paths plus optional per-frame ground truth."""

    frame_paths: list[str]
    ground_truth: list[BoundingBox] | None = None
    directory: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.frame_paths)

    def load_frame(self, index: int) -> Frame:
        return read_pgm(self.frame_paths[index])


def load_sequence(directory: str, gt_path: str | None = None) -> SequenceHandle:
    """Build a SequenceHandle from a directory of PGM frames.

    Frames are ordered by filename (lexicographic). Errors: missing
    directory, no frames, or a ground-truth line count that does not match
    the frame count.
    """
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"sequence directory not found: {directory}")
    names = sorted(n for n in os.listdir(directory) if n.endswith(".pgm"))
    if not names:
        raise ValueError(f"no .pgm frames in {directory}")
    paths = [os.path.join(directory, n) for n in names]
    gt = None
    if gt_path is not None:
        gt = read_box_file(gt_path)
        if len(gt) != len(paths):
            raise ValueError(
                f"ground-truth line count {len(gt)} != frame count {len(paths)}"
            )
    return SequenceHandle(paths, gt, directory)
