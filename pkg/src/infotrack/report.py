"""Figure rendering for the CLI report path.

Curves computed by the evaluation module are drawn to image files with
matplotlib (Agg backend, no display needed). Kept separate from the
evaluation module so the numeric path stays import-light.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluation import PRECISION_THRESHOLDS, SUCCESS_THRESHOLDS, EvalCurves


def _setup(ax, xlabel: str, ylabel: str, title: str) -> None:
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.set_ylim(0.0, 1.02)
    ax.grid(True, alpha=0.3)


def plot_success(curves: dict[str, EvalCurves], path: str) -> None:
    """Success-vs-overlap-threshold curves for one or more labeled runs."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, c in curves.items():
        ax.plot(SUCCESS_THRESHOLDS, c.success,
                label=f"{label} (auc {c.auc_success:.3f})")
    _setup(ax, "overlap threshold", "success rate", "Success")
    ax.legend(loc="lower left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_precision(curves: dict[str, EvalCurves], path: str) -> None:
    """Precision-vs-center-distance curves for one or more labeled runs."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, c in curves.items():
        ax.plot(PRECISION_THRESHOLDS, c.precision,
                label=f"{label} (p@20 {c.precision_at_20:.3f})")
    _setup(ax, "center distance threshold (px)", "precision", "Precision")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
