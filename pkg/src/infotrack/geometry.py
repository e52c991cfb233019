"""Axis-aligned boxes and the frame-to-frame motions that act on them.

A target state is a box in pixel coordinates; a motion is a translation of
the box center plus a log-scale change applied about the center, so
translation and scale never interact. Boxes are real-valued throughout;
rasterization to pixels happens only where image data is read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG_SCALE_LIMIT = math.log(2.0)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: top-left corner (x, y), width w, height h.

    Width and height must be strictly positive.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box needs positive size, got w={self.w} h={self.h}")

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class Transformation:
    """Center shift (dx, dy) plus log-scale change ds, |ds| <= ln 2."""

    dx: float = 0.0
    dy: float = 0.0
    ds: float = 0.0

    def __post_init__(self) -> None:
        for name in ("dx", "dy", "ds"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not abs(self.ds) <= LOG_SCALE_LIMIT:
            raise ValueError(f"log-scale change out of range: {self.ds}")

    def inverse(self) -> "Transformation":
        """Motion that undoes this one (center-anchored, so plain negation)."""
        return Transformation(-self.dx, -self.dy, -self.ds)


IDENTITY = Transformation(0.0, 0.0, 0.0)


def clamp_log_scale(ds: float) -> float:
    """Clamp a raw log-scale value into the legal [-ln 2, ln 2] range."""
    return min(max(ds, -LOG_SCALE_LIMIT), LOG_SCALE_LIMIT)


def compose(box: BoundingBox, motion: Transformation) -> BoundingBox:
    """Apply a motion to a box: shift the center, scale about the center."""
    cx = box.x + box.w / 2.0 + motion.dx
    cy = box.y + box.h / 2.0 + motion.dy
    scale = math.exp(motion.ds)
    w = box.w * scale
    h = box.h * scale
    return BoundingBox(cx - w / 2.0, cy - h / 2.0, w, h)


def compose_batch(box: BoundingBox, motions: np.ndarray) -> np.ndarray:
    """Apply N motions (rows of dx, dy, ds) to one box.

    Returns an (N, 4) array of x, y, w, h rows; same arithmetic as compose.
    """
    motions = np.asarray(motions, dtype=np.float64)
    cx = box.x + box.w / 2.0 + motions[:, 0]
    cy = box.y + box.h / 2.0 + motions[:, 1]
    scale = np.exp(motions[:, 2])
    w = box.w * scale
    h = box.h * scale
    return np.stack([cx - w / 2.0, cy - h / 2.0, w, h], axis=1)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection area over union area; 0 for disjoint boxes."""
    ix0 = max(a.x, b.x)
    iy0 = max(a.y, b.y)
    ix1 = min(a.x + a.w, b.x + b.w)
    iy1 = min(a.y + a.h, b.y + b.h)
    inter = max(0.0, ix1 - ix0) * max(0.0, iy1 - iy0)
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    # cancellation in (x + w) - x can push inter a few ulps past the area
    return min(inter / union, 1.0)


def center_distance(a: BoundingBox, b: BoundingBox) -> float:
    """Euclidean distance between box centers, in pixels."""
    ax, ay = a.center
    bx, by = b.center
    return math.hypot(ax - bx, ay - by)


def format_box(box: BoundingBox) -> str:
    """One box as an ASCII ``x,y,w,h`` line ('.' decimal separator)."""
    return f"{box.x!r},{box.y!r},{box.w!r},{box.h!r}"


def parse_box_line(line: str, lineno: int | None = None) -> BoundingBox:
    """Parse one ``x,y,w,h`` line; error messages carry the line number."""
    where = f" (line {lineno})" if lineno is not None else ""
    parts = line.strip().split(",")
    if len(parts) != 4:
        raise ValueError(f"expected 4 comma-separated fields{where}: {line!r}")
    try:
        x, y, w, h = (float(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"non-numeric box field{where}: {line!r}") from exc
    try:
        return BoundingBox(x, y, w, h)
    except ValueError as exc:
        raise ValueError(f"{exc}{where}") from exc


def read_box_file(path: str) -> list[BoundingBox]:
    """Read one box per line, skipping blank lines; 1-based line numbers."""
    boxes = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            boxes.append(parse_box_line(line, lineno))
    return boxes


def write_box_file(path: str, boxes: list[BoundingBox]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for box in boxes:
            fh.write(format_box(box) + "\n")
