"""Patch descriptors: contrast oracles, normalization, covariance, layout."""

import numpy as np
import pytest

from infotrack.features import (ALL_KINDS, DegenerateSampleError,
                                FeatureConfig, PatchFeatureExtractor,
                                extract_features)
from infotrack.geometry import BoundingBox
from infotrack.imaging import Frame


def test_default_dim_is_104():
    cfg = FeatureConfig()
    assert cfg.dim == 4 * 4 * 6 + 8 == 104
    frame = Frame(np.random.default_rng(0).random((40, 40)))
    vec = extract_features(frame, BoundingBox(4, 4, 30, 30), cfg)
    assert vec.shape == (104,)
    assert np.all(np.isfinite(vec))


@pytest.mark.parametrize("cfg", [
    FeatureConfig(grid_rows=2, grid_cols=3),
    FeatureConfig(haar_kinds=("h2", "v2"), include_histogram=False),
    FeatureConfig(grid_rows=1, grid_cols=1, haar_kinds=("mean",), histogram_bins=4),
])
def test_dim_matches_layout_formula(cfg):
    want = cfg.grid_rows * cfg.grid_cols * len(cfg.haar_kinds)
    if cfg.include_histogram:
        want += cfg.histogram_bins
    assert cfg.dim == want
    frame = Frame(np.random.default_rng(1).random((32, 32)))
    assert extract_features(frame, BoundingBox(2, 2, 20, 20), cfg).shape == (want,)


def test_config_validation():
    with pytest.raises(ValueError):
        FeatureConfig(grid_rows=0)
    with pytest.raises(ValueError):
        FeatureConfig(haar_kinds=("h2", "bogus"))
    with pytest.raises(ValueError):
        FeatureConfig(haar_kinds=())
    with pytest.raises(ValueError):
        FeatureConfig(histogram_bins=0)


def test_constant_patch_kills_contrasts():
    frame = Frame(np.full((32, 32), 0.5))
    cfg = FeatureConfig(haar_kinds=("h2", "v2", "h3", "quad", "center"),
                        include_histogram=False)
    vec = extract_features(frame, BoundingBox(4, 4, 20, 20), cfg)
    assert np.all(vec == 0.0)  # all-zero vector is exempt from normalization


def test_constant_patch_histogram_one_bin():
    frame = Frame(np.full((32, 32), 0.5))
    cfg = FeatureConfig(haar_kinds=("mean",), include_histogram=True,
                        histogram_bins=8)
    vec = extract_features(frame, BoundingBox(4, 4, 20, 20), cfg)
    hist = vec[-8:]
    assert np.count_nonzero(hist) == 1
    assert hist[4] > 0  # 0.5 * 8 bins lands in bin 4


def test_determinism():
    frame = Frame(np.random.default_rng(5).random((40, 40)))
    box = BoundingBox(3.7, 8.2, 21.4, 17.9)
    cfg = FeatureConfig()
    assert np.array_equal(extract_features(frame, box, cfg),
                          extract_features(frame, box, cfg))


def test_step_edge_matches_brute_force_oracle():
    """h2 over a vertical step edge equals the pixel-loop contrast."""
    pixels = np.full((32, 32), 0.2)
    pixels[:, 16:] = 0.8
    frame = Frame(pixels)
    cfg = FeatureConfig(grid_rows=2, grid_cols=2, haar_kinds=("h2",),
                        include_histogram=False)
    # box chosen so the edge at x=16 lands inside cell 1's left rect
    box = BoundingBox(2.0, 8.0, 24.0, 16.0)
    vec = extract_features(frame, box, cfg)

    raw = []
    for row in range(2):
        for col in range(2):
            cx0, cx1 = 2 + col * 12, 2 + (col + 1) * 12
            cy0, cy1 = 8 + row * 8, 8 + (row + 1) * 8
            xm = (cx0 + cx1) // 2
            left = pixels[cy0:cy1, cx0:xm]
            right = pixels[cy0:cy1, xm:cx1]
            raw.append(left.mean() - right.mean())
    raw = np.asarray(raw)
    want = raw / np.linalg.norm(raw)
    assert vec == pytest.approx(want, abs=1e-9)
    # transition cells see dark-left contrast; flat cells see none
    assert vec[1] < 0.0 and vec[3] < 0.0
    assert vec[0] == pytest.approx(0.0, abs=1e-9)


def test_residual_contrast_is_not_inflated_to_unit_norm():
    """An edge aligned with every rect boundary leaves only rounding
    residue; that must come back as zeros, not a normalized noise vector."""
    pixels = np.full((32, 32), 0.2)
    pixels[:, 16:] = 0.8
    frame = Frame(pixels)
    cfg = FeatureConfig(grid_rows=2, grid_cols=2, haar_kinds=("h2",),
                        include_histogram=False)
    vec = extract_features(frame, BoundingBox(8.0, 8.0, 16.0, 16.0), cfg)
    assert np.all(vec == 0.0)


def test_unit_norm_for_nonconstant_patch():
    rng = np.random.default_rng(9)
    frame = Frame(rng.random((48, 48)))
    extractor = PatchFeatureExtractor(frame, FeatureConfig())
    for _ in range(20):
        x, y = rng.uniform(0, 24, size=2)
        w, h = rng.uniform(8, 20, size=2)
        vec = extractor.extract(BoundingBox(x, y, w, h))
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-9)


def test_translation_covariance():
    rng = np.random.default_rng(13)
    pixels = rng.random((48, 48))
    shifted = np.roll(pixels, shift=(5, 3), axis=(0, 1))
    cfg = FeatureConfig()
    a = extract_features(Frame(pixels), BoundingBox(10, 12, 16, 14), cfg)
    b = extract_features(Frame(shifted), BoundingBox(13, 17, 16, 14), cfg)
    assert a == pytest.approx(b, abs=1e-9)


def test_degenerate_patch_raises():
    frame = Frame(np.random.default_rng(2).random((16, 16)))
    extractor = PatchFeatureExtractor(frame, FeatureConfig())
    outside = np.array([[100.0, 100.0, 5.0, 5.0]])
    assert not extractor.valid_mask(outside)[0]
    with pytest.raises(DegenerateSampleError):
        extractor.extract_many(outside)
    with pytest.raises(DegenerateSampleError):
        extractor.extract(BoundingBox(-50, -50, 2, 2))


def test_clipped_patch_still_extracts():
    frame = Frame(np.random.default_rng(4).random((32, 32)))
    extractor = PatchFeatureExtractor(frame, FeatureConfig())
    half_out = np.array([[-8.0, 4.0, 16.0, 16.0]])
    assert extractor.valid_mask(half_out)[0]
    vec = extractor.extract_many(half_out)[0]
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-9)


def test_extract_many_matches_extract():
    frame = Frame(np.random.default_rng(6).random((40, 40)))
    extractor = PatchFeatureExtractor(frame, FeatureConfig())
    boxes = np.array([[2.0, 3.0, 15.0, 12.0], [20.0, 18.0, 10.0, 16.0]])
    many = extractor.extract_many(boxes)
    for i, row in enumerate(boxes):
        single = extractor.extract(BoundingBox(*row))
        assert np.array_equal(many[i], single)


def test_all_kinds_have_entries():
    assert set(ALL_KINDS) == {"mean", "h2", "v2", "h3", "quad", "center"}
