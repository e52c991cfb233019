"""Haar-like patch descriptors computed from integral images.

A patch is clipped to the frame, subdivided into a grid of cells, and each
cell contributes one value per active contrast kind. Contrasts are
differences of mean intensity between sub-rectangles of the cell, so a
constant image yields exactly zero for every kind except the raw mean, and
no resampling of the patch is ever needed. An optional global intensity
histogram over the patch is appended, and the final vector is
L2-normalized unless it is all zeros.

Vector layout: cells in row-major order, kinds within a cell in the order
given by the config, then histogram bins. Kinds:

- ``h2``     left-half mean minus right-half mean
- ``v2``     top-half mean minus bottom-half mean
- ``h3``     middle-third mean minus outer-thirds mean (thirds along x)
- ``quad``   half the checkerboard contrast of the four quadrants
- ``center`` center mean minus surround mean (center = middle half both axes)
- ``mean``   raw mean intensity of the cell

Any contrast whose sub-rectangles rasterize to zero pixels is emitted as 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import BoundingBox
from .imaging import Frame, IntegralImage, integral

ALL_KINDS = ("mean", "h2", "v2", "h3", "quad", "center")

# Per-cell sub-rectangles, in gather order.
_RECT_NAMES = ("whole", "L", "R", "T", "B", "mid3", "TL", "BR", "TR", "BL", "center")
_R = {name: i for i, name in enumerate(_RECT_NAMES)}

_ZERO_NORM = 1e-8


class DegenerateSampleError(ValueError):
    """Raised when a patch has no pixels after clipping to the frame."""


@dataclass(frozen=True)
class FeatureConfig:
    """Descriptor layout: grid size, active contrast kinds, histogram."""

    grid_rows: int = 4
    grid_cols: int = 4
    haar_kinds: tuple[str, ...] = ALL_KINDS
    include_histogram: bool = True
    histogram_bins: int = 8

    def __post_init__(self) -> None:
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise ValueError("grid must be at least 1x1")
        bad = [k for k in self.haar_kinds if k not in ALL_KINDS]
        if bad or not self.haar_kinds:
            raise ValueError(f"unknown contrast kinds: {bad}")
        if self.include_histogram and self.histogram_bins < 1:
            raise ValueError("histogram needs at least one bin")

    @property
    def dim(self) -> int:
        d = self.grid_rows * self.grid_cols * len(self.haar_kinds)
        if self.include_histogram:
            d += self.histogram_bins
        return d


@dataclass(frozen=True)
class _Recipe:
    """Static per-config gather plan: grid-line fractions and rect indices."""

    x_fracs: np.ndarray  # (NX,) fractions of patch width
    y_fracs: np.ndarray  # (NY,) fractions of patch height
    rx0: np.ndarray  # (n_cells * 11,) indices into the x grid lines
    rx1: np.ndarray
    ry0: np.ndarray
    ry1: np.ndarray


_RECIPES: dict[FeatureConfig, _Recipe] = {}

# Cell-local line offsets, as fractions of the cell span.
_X_OFFSETS = (Fraction(0), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2),
              Fraction(2, 3), Fraction(3, 4), Fraction(1))
_Y_OFFSETS = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))


def _build_recipe(cfg: FeatureConfig) -> _Recipe:
    rows, cols = cfg.grid_rows, cfg.grid_cols
    x_set: set[Fraction] = set()
    y_set: set[Fraction] = set()
    for c in range(cols):
        for off in _X_OFFSETS:
            x_set.add((Fraction(c) + off) / cols)
    for r in range(rows):
        for off in _Y_OFFSETS:
            y_set.add((Fraction(r) + off) / rows)
    xs = sorted(x_set)
    ys = sorted(y_set)
    xi = {f: i for i, f in enumerate(xs)}
    yi = {f: i for i, f in enumerate(ys)}

    rx0, rx1, ry0, ry1 = [], [], [], []
    for r in range(rows):
        for c in range(cols):
            def xl(off: Fraction) -> int:
                return xi[(Fraction(c) + off) / cols]

            def yl(off: Fraction) -> int:
                return yi[(Fraction(r) + off) / rows]

            x0, xq1, x13, xm = xl(Fraction(0)), xl(Fraction(1, 4)), xl(Fraction(1, 3)), xl(Fraction(1, 2))
            x23, xq3, x1 = xl(Fraction(2, 3)), xl(Fraction(3, 4)), xl(Fraction(1))
            y0, yq1, ym, yq3, y1 = (yl(Fraction(0)), yl(Fraction(1, 4)), yl(Fraction(1, 2)),
                                    yl(Fraction(3, 4)), yl(Fraction(1)))
            # order must match _RECT_NAMES
            rects = [
                (x0, x1, y0, y1),    # whole
                (x0, xm, y0, y1),    # L
                (xm, x1, y0, y1),    # R
                (x0, x1, y0, ym),    # T
                (x0, x1, ym, y1),    # B
                (x13, x23, y0, y1),  # mid3
                (x0, xm, y0, ym),    # TL
                (xm, x1, ym, y1),    # BR
                (xm, x1, y0, ym),    # TR
                (x0, xm, ym, y1),    # BL
                (xq1, xq3, yq1, yq3),  # center
            ]
            for a, b, c0, d in rects:
                rx0.append(a)
                rx1.append(b)
                ry0.append(c0)
                ry1.append(d)

    return _Recipe(
        np.array([float(f) for f in xs]),
        np.array([float(f) for f in ys]),
        np.array(rx0, dtype=np.intp),
        np.array(rx1, dtype=np.intp),
        np.array(ry0, dtype=np.intp),
        np.array(ry1, dtype=np.intp),
    )


def _recipe(cfg: FeatureConfig) -> _Recipe:
    recipe = _RECIPES.get(cfg)
    if recipe is None:
        recipe = _RECIPES[cfg] = _build_recipe(cfg)
    return recipe


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


class PatchFeatureExtractor:
    """Per-frame descriptor engine; builds integral tables once per frame."""

    def __init__(self, frame: Frame, cfg: FeatureConfig,
                 ii: IntegralImage | None = None) -> None:
        self.cfg = cfg
        self.width = frame.width
        self.height = frame.height
        self.ii = ii if ii is not None else integral(frame)
        self._recipe = _recipe(cfg)
        self._bin_tables = None
        if cfg.include_histogram:
            bins = cfg.histogram_bins
            idx = np.minimum((frame.pixels * bins).astype(np.intp), bins - 1)
            tables = np.zeros((bins, frame.height + 1, frame.width + 1))
            for b in range(bins):
                one = (idx == b).astype(np.float64)
                np.cumsum(one, axis=0, out=tables[b, 1:, 1:])
                np.cumsum(tables[b, 1:, 1:], axis=1, out=tables[b, 1:, 1:])
            self._bin_tables = tables

    def _clipped_lines(self, boxes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Rasterized grid-line pixel coordinates for each clipped box."""
        rec = self._recipe
        x0 = np.clip(boxes[:, 0], 0.0, float(self.width))
        x1 = np.clip(boxes[:, 0] + boxes[:, 2], 0.0, float(self.width))
        y0 = np.clip(boxes[:, 1], 0.0, float(self.height))
        y1 = np.clip(boxes[:, 1] + boxes[:, 3], 0.0, float(self.height))
        xs = np.floor(x0[:, None] + (x1 - x0)[:, None] * rec.x_fracs + 0.5).astype(np.intp)
        ys = np.floor(y0[:, None] + (y1 - y0)[:, None] * rec.y_fracs + 0.5).astype(np.intp)
        return xs, ys

    def valid_mask(self, boxes: np.ndarray) -> np.ndarray:
        """True where the clipped box rasterizes to at least one pixel."""
        boxes = np.asarray(boxes, dtype=np.float64)
        xs, ys = self._clipped_lines(boxes)
        return (xs[:, -1] > xs[:, 0]) & (ys[:, -1] > ys[:, 0])

    def extract_many(self, boxes: np.ndarray) -> np.ndarray:
        """Descriptors for N boxes as an (N, dim) array.

        Every box must have a non-empty clipped raster (see valid_mask);
        otherwise DegenerateSampleError is raised naming the first bad row.
        """
        boxes = np.asarray(boxes, dtype=np.float64)
        if boxes.ndim != 2 or boxes.shape[1] != 4:
            raise ValueError("boxes must be (N, 4)")
        cfg = self.cfg
        rec = self._recipe
        xs, ys = self._clipped_lines(boxes)
        empty = (xs[:, -1] <= xs[:, 0]) | (ys[:, -1] <= ys[:, 0])
        if empty.any():
            raise DegenerateSampleError(
                f"patch {int(np.argmax(empty))} has no pixels after clipping"
            )

        t = self.ii.table
        px0 = xs[:, rec.rx0]
        px1 = xs[:, rec.rx1]
        py0 = ys[:, rec.ry0]
        py1 = ys[:, rec.ry1]
        sums = t[py1, px1] - t[py0, px1] - t[py1, px0] + t[py0, px0]
        areas = ((px1 - px0) * (py1 - py0)).astype(np.float64)

        n = boxes.shape[0]
        n_cells = cfg.grid_rows * cfg.grid_cols
        sums = sums.reshape(n, n_cells, len(_RECT_NAMES))
        areas = areas.reshape(n, n_cells, len(_RECT_NAMES))
        means = _safe_div(sums, areas)

        def rect(name: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
            i = _R[name]
            return means[:, :, i], sums[:, :, i], areas[:, :, i]

        m_whole, s_whole, a_whole = rect("whole")
        columns = []
        for kind in cfg.haar_kinds:
            if kind == "mean":
                columns.append(m_whole)
            elif kind == "h2":
                m_l, _, a_l = rect("L")
                m_r, _, a_r = rect("R")
                columns.append(np.where((a_l > 0) & (a_r > 0), m_l - m_r, 0.0))
            elif kind == "v2":
                m_t, _, a_t = rect("T")
                m_b, _, a_b = rect("B")
                columns.append(np.where((a_t > 0) & (a_b > 0), m_t - m_b, 0.0))
            elif kind == "h3":
                m_m, s_m, a_m = rect("mid3")
                a_o = a_whole - a_m
                m_o = _safe_div(s_whole - s_m, a_o)
                columns.append(np.where((a_m > 0) & (a_o > 0), m_m - m_o, 0.0))
            elif kind == "quad":
                m_tl, _, a_tl = rect("TL")
                m_br, _, a_br = rect("BR")
                m_tr, _, a_tr = rect("TR")
                m_bl, _, a_bl = rect("BL")
                ok = (a_tl > 0) & (a_br > 0) & (a_tr > 0) & (a_bl > 0)
                columns.append(np.where(ok, 0.5 * (m_tl + m_br - m_tr - m_bl), 0.0))
            elif kind == "center":
                m_c, s_c, a_c = rect("center")
                a_s = a_whole - a_c
                m_s = _safe_div(s_whole - s_c, a_s)
                columns.append(np.where((a_c > 0) & (a_s > 0), m_c - m_s, 0.0))
        struct = np.stack(columns, axis=2).reshape(n, n_cells * len(cfg.haar_kinds))

        parts = [struct]
        if cfg.include_histogram:
            bt = self._bin_tables
            wx0, wx1 = xs[:, 0], xs[:, -1]
            wy0, wy1 = ys[:, 0], ys[:, -1]
            counts = (bt[:, wy1, wx1] - bt[:, wy0, wx1]
                      - bt[:, wy1, wx0] + bt[:, wy0, wx0]).T
            total = ((wx1 - wx0) * (wy1 - wy0)).astype(np.float64)
            parts.append(counts / total[:, None])
        vecs = np.concatenate(parts, axis=1)

        norms = np.linalg.norm(vecs, axis=1)
        # below ~1e-8 the entries are integral-table cancellation residue,
        # not contrast; normalizing would inflate noise into a unit vector
        scale = np.where(norms > _ZERO_NORM, norms, 1.0)
        return np.where(norms[:, None] > _ZERO_NORM, vecs / scale[:, None], 0.0)

    def extract(self, box: BoundingBox) -> np.ndarray:
        return self.extract_many(np.array([[box.x, box.y, box.w, box.h]]))[0]


def extract_features(frame: Frame, box: BoundingBox, cfg: FeatureConfig) -> np.ndarray:
    """One-shot descriptor; builds the per-frame tables and throws them away."""
    return PatchFeatureExtractor(frame, cfg).extract(box)
