"""Success and precision curves for a tracked trajectory against ground truth.

The success curve samples overlap thresholds 0.00..1.00 in steps of 0.01
(101 points) and reports, per threshold, the fraction of frames whose IoU
strictly exceeds it. The precision curve samples center-distance
thresholds 0..50 px (51 points) and reports the fraction of frames whose
center error is within the threshold. The first frame is excluded from
both: it is the supervised initialization, not a prediction. Headline
numbers: auc_success is the mean of the 101 success points, and
precision_at_20 is the precision value at 20 px.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import BoundingBox, center_distance, iou

SUCCESS_THRESHOLDS = np.round(np.arange(101) * 0.01, 2)
PRECISION_THRESHOLDS = np.arange(51, dtype=np.float64)
PRECISION_HEADLINE = 20.0


@dataclass
class EvalCurves:
    """Curves plus headline numbers for one trajectory."""

    success: np.ndarray  # 101 values over SUCCESS_THRESHOLDS
    precision: np.ndarray  # 51 values over PRECISION_THRESHOLDS
    auc_success: float
    precision_at_20: float


def evaluate(trajectory: list[BoundingBox], ground_truth: list[BoundingBox]) -> EvalCurves:
    """Score a trajectory; both lists must cover the same frames."""
    if len(trajectory) != len(ground_truth):
        raise ValueError(
            f"trajectory has {len(trajectory)} frames, ground truth {len(ground_truth)}"
        )
    if len(trajectory) < 2:
        raise ValueError("need at least one frame beyond the initialization")
    overlaps = np.array([iou(p, g) for p, g in
                         zip(trajectory[1:], ground_truth[1:])])
    dists = np.array([center_distance(p, g) for p, g in
                      zip(trajectory[1:], ground_truth[1:])])
    success = np.array([(overlaps > thr).mean() for thr in SUCCESS_THRESHOLDS])
    precision = np.array([(dists <= thr).mean() for thr in PRECISION_THRESHOLDS])
    at20 = float(precision[int(PRECISION_HEADLINE)])
    return EvalCurves(success, precision, float(success.mean()), at20)


@dataclass
class ComparisonRow:
    metric: str
    value_a: float
    value_b: float
    delta: float  # b - a


def compare(curves_a: EvalCurves, curves_b: EvalCurves) -> list[ComparisonRow]:
    """Side-by-side headline metrics for two runs (delta = b - a)."""
    rows = []
    for name in ("auc_success", "precision_at_20"):
        a = getattr(curves_a, name)
        b = getattr(curves_b, name)
        rows.append(ComparisonRow(name, a, b, b - a))
    return rows


def curve_csv_lines(thresholds: np.ndarray, values: np.ndarray) -> list[str]:
    """``threshold,value`` lines with a header, for external plotting."""
    lines = ["threshold,value"]
    for t, v in zip(thresholds, values):
        lines.append(f"{t:.6f},{v:.6f}")
    return lines


def summary_lines(curves: EvalCurves) -> list[str]:
    """Headline metrics as flat key=value lines."""
    return [
        f"auc_success={curves.auc_success:.6f}",
        f"precision_at_20={curves.precision_at_20:.6f}",
    ]
