"""Critic that learns which candidate motions confuse the short-term model.

The critic is its own budgeted SVM over joint vectors: the candidate
patch's appearance descriptor concatenated with its motion normalized by
the reference box (dx/w, dy/h, ds). Proposing works by drawing a pool of
Gaussian candidates, ranking them by critic score, and walking that
ranking until one lands inside the short-term model's uncertainty band
(|score| < tau); after max_rejects consecutive failures the best candidate
seen (smallest |score|) is returned as a fallback. Reinforcement labels a
sample +1 exactly when the short-term model was uncertain about it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureConfig, PatchFeatureExtractor
from .geometry import BoundingBox, Transformation, clamp_log_scale, compose_batch
from .imaging import Frame
from .svm import BudgetedSvm


class CriticProposeError(RuntimeError):
    """Raised when every drawn candidate is degenerate (no usable pixels)."""


@dataclass(frozen=True)
class CriticConfig:
    """Pool size, rejection patience, model budget, optional fixed scales.

    sigma_* of None means "use the caller's search scales" (the tracker
    passes its current Gaussian search scales in that case).
    """

    candidates: int = 64
    max_rejects: int = 10
    budget: int = 50
    sigma_dx: float | None = None
    sigma_dy: float | None = None
    sigma_ds: float | None = None

    def __post_init__(self) -> None:
        if self.candidates < 1:
            raise ValueError("candidate pool must be non-empty")
        if self.max_rejects < 1:
            raise ValueError("max_rejects must be positive")

    def resolve_sigmas(self, fallback: tuple[float, float, float]) -> tuple[float, float, float]:
        return (
            self.sigma_dx if self.sigma_dx is not None else fallback[0],
            self.sigma_dy if self.sigma_dy is not None else fallback[1],
            self.sigma_ds if self.sigma_ds is not None else fallback[2],
        )


def motion_triple(box: BoundingBox, motion: Transformation) -> np.ndarray:
    """Motion normalized by the reference box: (dx/w, dy/h, ds)."""
    return np.array([motion.dx / box.w, motion.dy / box.h, motion.ds])


def joint_vector(patch_features: np.ndarray, box: BoundingBox,
                 motion: Transformation) -> np.ndarray:
    """Appearance descriptor with the normalized motion triple appended."""
    return np.concatenate([patch_features, motion_triple(box, motion)])


@dataclass
class ProposeResult:
    """One proposed candidate plus everything already computed for it."""

    motion: Transformation
    patch_features: np.ndarray
    joint: np.ndarray
    short_score: float
    accepted: bool  # False when the fallback path produced the candidate
    n_tested: int


class Critic:
    """Candidate proposer backed by an online SVM over joint vectors."""

    def __init__(self, model: BudgetedSvm, cfg: CriticConfig,
                 rng: np.random.Generator) -> None:
        self.model = model
        self.cfg = cfg
        self.rng = rng

    def _draw(self, count: int, sigmas: tuple[float, float, float]) -> np.ndarray:
        draws = self.rng.normal(size=(count, 3)) * np.asarray(sigmas)
        draws[:, 2] = np.clip(draws[:, 2], -np.log(2.0), np.log(2.0))
        return draws

    def propose_with(self, extractor: PatchFeatureExtractor, box: BoundingBox,
                     short_model: BudgetedSvm, tau: float,
                     sigmas: tuple[float, float, float]) -> ProposeResult:
        """Propose one candidate motion around box (see module docstring).

        tau must be positive. Degenerate candidates are skipped; if the
        whole pool is degenerate, CriticProposeError is raised.
        """
        if not tau > 0:
            raise ValueError(f"uncertainty threshold must be positive, got {tau}")
        cfg = self.cfg
        draws = self._draw(cfg.candidates, sigmas)
        boxes = compose_batch(box, draws)
        valid = extractor.valid_mask(boxes)
        if not valid.any():
            raise CriticProposeError("all candidate patches fell outside the frame")
        draws = draws[valid]
        feats = extractor.extract_many(boxes[valid])
        triples = draws.copy()
        triples[:, 0] /= box.w
        triples[:, 1] /= box.h
        joints = np.concatenate([feats, triples], axis=1)

        ranking = self.model.score_many(joints)
        # Stable sort keeps generation order among equal critic scores.
        order = np.argsort(-ranking, kind="stable")
        tried = order[: cfg.max_rejects]
        short_scores = short_model.score_many(feats[tried])

        best_j = 0
        result_j = None
        accepted = False
        n_tested = len(short_scores)
        for j, h in enumerate(short_scores):
            if abs(h) < tau:
                result_j = j
                accepted = True
                n_tested = j + 1
                break
            if abs(h) < abs(short_scores[best_j]):
                best_j = j
        if result_j is None:
            result_j = best_j
        idx = int(tried[result_j])
        motion = Transformation(draws[idx, 0], draws[idx, 1],
                                clamp_log_scale(draws[idx, 2]))
        return ProposeResult(
            motion=motion,
            patch_features=feats[idx],
            joint=joints[idx],
            short_score=float(short_scores[result_j]),
            accepted=accepted,
            n_tested=n_tested,
        )

    def propose(self, frame: Frame, box: BoundingBox, short_model: BudgetedSvm,
                tau: float, feature_cfg: FeatureConfig,
                sigmas: tuple[float, float, float]) -> Transformation:
        """Convenience wrapper that builds the per-frame extractor itself."""
        extractor = PatchFeatureExtractor(frame, feature_cfg)
        return self.propose_with(extractor, box, short_model, tau, sigmas).motion

    def reinforce_with(self, joint: np.ndarray, short_score: float, tau: float) -> None:
        """Teach the critic: +1 if the short model was uncertain, else -1."""
        label = 1 if abs(short_score) < tau else -1
        self.model.update((joint[None, :], np.array([label])))

    def reinforce(self, frame: Frame, box: BoundingBox, motion: Transformation,
                  short_score: float, tau: float, feature_cfg: FeatureConfig) -> None:
        """Extract-and-reinforce wrapper for a single sample."""
        from .features import extract_features
        from .geometry import compose

        patch = extract_features(frame, compose(box, motion), feature_cfg)
        self.reinforce_with(joint_vector(patch, box, motion), short_score, tau)
