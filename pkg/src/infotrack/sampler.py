"""Candidate motion sampling: Gaussian search and the critic-guided hybrid.

The Gaussian sampler draws motions around zero with per-axis scales tied
to the current target size, clamping log-scale draws into the legal range.
The hybrid batch keeps the first half Gaussian and fills the second half
with critic proposals; each sample (both halves) reinforces the critic
right after it is scored by the short-term model, and a critic slot whose
whole candidate pool is degenerate falls back to a fresh Gaussian draw
tagged as such.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .critic import Critic, CriticProposeError, motion_triple
from .features import PatchFeatureExtractor
from .geometry import BoundingBox, Transformation, compose_batch
from .svm import BudgetedSvm

GAUSSIAN = "gaussian"
CRITIC = "critic"


@dataclass(frozen=True)
class SamplerConfig:
    """Batch size and search scales as factors of the target size.

    The concrete per-frame scales are (sigma_xy_factor * max(w, h),
    sigma_xy_factor * max(w, h), sigma_scale) for the current box.
    """

    n: int = 120
    sigma_xy_factor: float = 0.3
    sigma_scale: float = 0.05

    def __post_init__(self) -> None:
        if self.n < 2 or self.n % 2 != 0:
            raise ValueError(f"batch size must be even and >= 2, got {self.n}")
        if self.sigma_xy_factor < 0 or self.sigma_scale < 0:
            raise ValueError("search scales must be non-negative")


class Sampler:
    """Stateful Gaussian motion sampler (owns its RNG stream)."""

    def __init__(self, cfg: SamplerConfig, rng: np.random.Generator) -> None:
        self.cfg = cfg
        self.rng = rng

    def sigmas_for(self, box: BoundingBox, inflation: float = 1.0) -> tuple[float, float, float]:
        """Concrete search scales for a box, widened by the inflation factor."""
        side = max(box.w, box.h)
        return (
            self.cfg.sigma_xy_factor * side * inflation,
            self.cfg.sigma_xy_factor * side * inflation,
            self.cfg.sigma_scale * inflation,
        )

    def draw_motions(self, count: int, sigmas: tuple[float, float, float]) -> np.ndarray:
        """(count, 3) array of dx, dy, ds draws with ds clamped to [-ln2, ln2]."""
        draws = self.rng.normal(size=(count, 3)) * np.asarray(sigmas)
        draws[:, 2] = np.clip(draws[:, 2], -np.log(2.0), np.log(2.0))
        return draws

    def gaussian_batch(self, count: int,
                       sigmas: tuple[float, float, float]) -> list[Transformation]:
        draws = self.draw_motions(count, sigmas)
        return [Transformation(d[0], d[1], d[2]) for d in draws]


@dataclass
class SampleDraw:
    """One candidate motion with whatever was computed while drawing it.

    features and short_score are None when the patch was degenerate.
    """

    motion: Transformation
    source: str
    features: np.ndarray | None
    short_score: float | None


@dataclass
class HybridStats:
    """Bookkeeping for one hybrid batch."""

    critic_slots: int = 0
    accepted: int = 0  # proposals that passed the uncertainty test (no fallback)
    refills: int = 0  # critic slots refilled with a Gaussian draw

    @property
    def accept_rate(self) -> float:
        return self.accepted / self.critic_slots if self.critic_slots else 0.0


def _gaussian_draws(sampler: Sampler, extractor: PatchFeatureExtractor,
                    box: BoundingBox, short_model: BudgetedSvm, count: int,
                    sigmas: tuple[float, float, float]) -> list[SampleDraw]:
    motions = sampler.draw_motions(count, sigmas)
    boxes = compose_batch(box, motions)
    valid = extractor.valid_mask(boxes)
    draws: list[SampleDraw] = [
        SampleDraw(Transformation(m[0], m[1], m[2]), GAUSSIAN, None, None)
        for m in motions
    ]
    if valid.any():
        feats = extractor.extract_many(boxes[valid])
        scores = short_model.score_many(feats)
        for row, i in enumerate(np.flatnonzero(valid)):
            draws[i].features = feats[row]
            draws[i].short_score = float(scores[row])
    return draws


def gaussian_only_batch(sampler: Sampler, extractor: PatchFeatureExtractor,
                        box: BoundingBox, short_model: BudgetedSvm,
                        sigmas: tuple[float, float, float]) -> tuple[list[SampleDraw], HybridStats]:
    """Baseline batch: all n samples Gaussian, critic untouched."""
    draws = _gaussian_draws(sampler, extractor, box, short_model,
                            sampler.cfg.n, sigmas)
    return draws, HybridStats()


def hybrid_batch(sampler: Sampler, critic: Critic,
                 extractor: PatchFeatureExtractor, box: BoundingBox,
                 short_model: BudgetedSvm, tau: float,
                 sigmas: tuple[float, float, float]) -> tuple[list[SampleDraw], HybridStats]:
    """Gaussian half first, critic-proposed half second.

    Every scored sample reinforces the critic in draw order. Returns the
    n draws plus acceptance bookkeeping.
    """
    half = sampler.cfg.n // 2
    critic_sigmas = critic.cfg.resolve_sigmas(sigmas)
    draws = _gaussian_draws(sampler, extractor, box, short_model, half, sigmas)
    for d in draws:
        if d.features is not None:
            critic.reinforce_with(
                np.concatenate([d.features, motion_triple(box, d.motion)]),
                d.short_score, tau,
            )
    stats = HybridStats(critic_slots=half)
    for _ in range(half):
        try:
            res = critic.propose_with(extractor, box, short_model, tau, critic_sigmas)
        except CriticProposeError:
            stats.refills += 1
            refill = _gaussian_draws(sampler, extractor, box, short_model, 1, sigmas)[0]
            if refill.features is not None:
                critic.reinforce_with(
                    np.concatenate([refill.features, motion_triple(box, refill.motion)]),
                    refill.short_score, tau,
                )
            draws.append(refill)
            continue
        if res.accepted:
            stats.accepted += 1
        critic.reinforce_with(res.joint, res.short_score, tau)
        draws.append(SampleDraw(res.motion, CRITIC, res.patch_features,
                                res.short_score))
    return draws, stats

