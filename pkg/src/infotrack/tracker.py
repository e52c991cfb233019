"""Co-tracking engine: two classifiers trading labels through uncertainty.

Each frame is reduced to a batch of candidate motions. Both classifiers
score every candidate; a sample's label comes from whichever classifier is
certain about it (|score| >= tau), or from the reliability-weighted vote
when neither or both are. tau is the (m+1)-th smallest |short score|, so
exactly the m most uncertain samples per classifier form its query set.
The short-term model retrains every frame on its own uncertain samples
with the fused labels; the long-term model retrains on the whole sample
archive only every delta-th frame. Classifier reliabilities follow their
disagreement with the fused labels, and the new state is the
confidence-weighted mean motion of the positively labeled samples.

Sign convention everywhere: an exact zero maps to the negative class.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass

import numpy as np

from .config import TrackerConfig
from .critic import Critic
from .features import PatchFeatureExtractor
from .geometry import BoundingBox, Transformation, clamp_log_scale, compose
from .imaging import Frame
from .sampler import Sampler, SampleDraw, gaussian_only_batch, hybrid_batch
from .svm import BudgetedSvm

INITIAL_TAU = 0.5  # uncertainty threshold handed to the first frame's critic phase
TAU_FLOOR = 1e-9  # the critic phase needs a strictly positive threshold
INIT_EPOCH_CAP = 50  # first-frame passes stop early once every example is separated
REFRESH_EPOCH_CAP = 2  # archive labels are noisy; more passes oscillate without gain
INFLATION_STEP = 1.5
INFLATION_CAP = 3.0

HYBRID = "hybrid"
GAUSSIAN_ONLY = "gaussian"

# Ring of offsets (in box sizes) used to mine negatives around the target.
_COMPASS = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))
_NEGATIVE_RINGS = (1.0, 1.5)


@dataclass
class ScoredSample:
    """One candidate motion scored by both classifiers."""

    motion: Transformation
    features: np.ndarray
    s1: float  # short-term score
    s2: float  # long-term score
    source: str
    fused_score: float | None = None
    fused_label: int | None = None


@dataclass
class FrameContext:
    """Everything the fusion stage decided for one frame."""

    frame_index: int
    samples: list[ScoredSample]
    tau: float
    q12: np.ndarray
    q21: np.ndarray
    e1: int
    e2: int
    weights: tuple[float, float]
    critic_accept_rate: float
    refills: int
    failed: bool = False


@dataclass
class StepResult:
    box: BoundingBox
    confidence: float
    context: FrameContext


def _sign(v: float) -> int:
    return 1 if v > 0 else -1


def uncertainty_threshold(scores, m: int) -> float:
    """The (m+1)-th smallest |score|; max + 1 when fewer than m+1 samples.

    Exactly the m smallest-|score| samples fall strictly below the result
    (up to ties at the boundary value).
    """
    a = np.sort(np.abs(np.asarray(scores, dtype=np.float64)))
    if a.size == 0:
        raise ValueError("no scores to threshold")
    if m >= a.size:
        return float(a[-1] + 1.0)
    return float(a[m])


def select_queries(scores, m: int) -> np.ndarray:
    """Indices of the m smallest-|score| samples (ties by index), ascending."""
    a = np.abs(np.asarray(scores, dtype=np.float64))
    order = np.lexsort((np.arange(a.size), a))
    return np.sort(order[: min(m, a.size)])


def fuse_labels(samples: list[ScoredSample], tau: float,
                weights: tuple[float, float],
                m: int) -> tuple[np.ndarray, np.ndarray]:
    """Label every sample in place and return the query sets (q12, q21).

    A classifier is certain when |score| >= tau. One-sided certainty takes
    that classifier's sign; otherwise the weighted vote decides. The
    weights are the previous frame's reliabilities, and the weighted score
    is kept on the sample for the state estimate. The query sets are each
    classifier's m most uncertain sample indices.
    """
    w1, w2 = weights
    for s in samples:
        s.fused_score = w1 * s.s1 + w2 * s.s2
        cert1 = abs(s.s1) >= tau
        cert2 = abs(s.s2) >= tau
        if cert1 and not cert2:
            s.fused_label = _sign(s.s1)
        elif cert2 and not cert1:
            s.fused_label = _sign(s.s2)
        else:
            s.fused_label = _sign(s.fused_score)
    q12 = select_queries([s.s1 for s in samples], m)
    q21 = select_queries([s.s2 for s in samples], m)
    return q12, q21


def compute_errors_weights(samples: list[ScoredSample],
                           epsilon: float) -> tuple[int, int, float, float]:
    """Disagreement counts with the fused labels and the new reliabilities.

    Zero disagreement on both sides pins the weights at (0.5, 0.5).
    """
    e1 = sum(1 for s in samples if _sign(s.s1) != s.fused_label)
    e2 = sum(1 for s in samples if _sign(s.s2) != s.fused_label)
    if e1 == 0 and e2 == 0:
        return 0, 0, 0.5, 0.5
    total = e1 + e2 + epsilon
    w1 = min(max(1.0 - (e1 + epsilon) / total, 0.0), 1.0)
    w2 = min(max(1.0 - (e2 + epsilon) / total, 0.0), 1.0)
    return e1, e2, w1, w2


def estimate_state(samples: list[ScoredSample],
                   previous: BoundingBox) -> tuple[BoundingBox, float]:
    """Weighted mean motion of the positive samples applied to the state.

    Weights are the fused scores; only samples labeled positive with a
    strictly positive fused score participate. With none, the state is
    frozen and confidence is 0.
    """
    positives = [s for s in samples
                 if s.fused_label == 1 and s.fused_score is not None and s.fused_score > 0]
    if not positives:
        return previous, 0.0
    weights = np.array([s.fused_score for s in positives])
    motions = np.array([[s.motion.dx, s.motion.dy, s.motion.ds] for s in positives])
    mean = weights @ motions / weights.sum()
    motion = Transformation(float(mean[0]), float(mean[1]),
                            clamp_log_scale(float(mean[2])))
    return compose(previous, motion), float(weights.max())


class SampleArchive:
    """Ring buffer of per-frame labeled sample batches (capacity in frames)."""

    def __init__(self, capacity: int) -> None:
        self._frames: collections.deque = collections.deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._frames)

    def append_frame(self, features: np.ndarray, labels: np.ndarray) -> None:
        self._frames.append((np.asarray(features, dtype=np.float64),
                             np.asarray(labels, dtype=np.int64)))

    def all_examples(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.concatenate([f for f, _ in self._frames], axis=0)
        ys = np.concatenate([l for _, l in self._frames], axis=0)
        return xs, ys


def _fit_until_separated(model: BudgetedSvm, feats: np.ndarray,
                         labels: np.ndarray, max_epochs: int) -> None:
    """Repeat single-pass updates until every example sits at margin >= 1.

    A lone pass pins only the margins of late examples; interleaving
    passes spreads the constraint over the whole batch.  The cap keeps
    noisily labeled batches, which never separate, from looping.
    """
    for _ in range(max_epochs):
        if np.all(labels * model.score_many(feats) >= 1.0 - 1e-9):
            break
        model.update((feats, labels))


class CoTracker:
    """Stateful tracker; call start() on the first frame, then step()."""

    def __init__(self, cfg: TrackerConfig, mode: str = HYBRID) -> None:
        if mode not in (HYBRID, GAUSSIAN_ONLY):
            raise ValueError(f"unknown sampler mode: {mode}")
        self.cfg = cfg
        self.mode = mode
        seeds = np.random.SeedSequence(cfg.seed).spawn(2)
        self.sampler = Sampler(cfg.sampler, np.random.Generator(np.random.PCG64(seeds[0])))
        self.critic = Critic(
            BudgetedSvm(c=cfg.svm_c, gamma=cfg.svm_gamma, budget=cfg.critic.budget),
            cfg.critic,
            np.random.Generator(np.random.PCG64(seeds[1])),
        )
        self.short = BudgetedSvm(c=cfg.svm_c, gamma=cfg.svm_gamma, budget=cfg.svm_budget)
        self.long = BudgetedSvm(c=cfg.svm_c, gamma=cfg.svm_gamma, budget=cfg.svm_budget)
        self.archive = SampleArchive(cfg.delta)
        self.box: BoundingBox | None = None
        self.weights = (0.5, 0.5)
        self.tau = INITIAL_TAU
        self.inflation = 1.0
        self.t = 0

    def start(self, frame: Frame, gt_box: BoundingBox) -> None:
        """Train both classifiers on the first frame's supervised patch.

        One positive at the annotated box, negatives on two rings of
        compass offsets (1.0 and 1.5 box sizes); offsets whose patches
        leave the frame entirely are skipped.  The positive is placed
        last so each pass ends by re-pinning its margin, and passes
        repeat until the whole batch is separated (margin >= 1) or the
        epoch cap trips.
        """
        extractor = PatchFeatureExtractor(frame, self.cfg.features)
        rows = []
        for ring in _NEGATIVE_RINGS:
            for ux, uy in _COMPASS:
                rows.append([gt_box.x + ux * ring * gt_box.w,
                             gt_box.y + uy * ring * gt_box.h,
                             gt_box.w, gt_box.h])
        rows.append([gt_box.x, gt_box.y, gt_box.w, gt_box.h])
        rows = np.asarray(rows, dtype=np.float64)
        valid = extractor.valid_mask(rows)
        if not valid[-1]:
            raise ValueError("ground-truth box has no pixels inside the frame")
        feats = extractor.extract_many(rows[valid])
        labels = np.where(np.flatnonzero(valid) == len(rows) - 1, 1, -1)
        _fit_until_separated(self.short, feats, labels, INIT_EPOCH_CAP)
        _fit_until_separated(self.long, feats, labels, INIT_EPOCH_CAP)
        self.archive.append_frame(feats, labels)
        self.box = gt_box
        self.weights = (0.5, 0.5)
        self.tau = INITIAL_TAU
        self.inflation = 1.0
        self.t = 0

    def _freeze(self, reason_failed: bool) -> StepResult:
        self.inflation = min(self.inflation * INFLATION_STEP, INFLATION_CAP)
        ctx = FrameContext(self.t, [], 0.0, np.empty(0, dtype=int),
                           np.empty(0, dtype=int), 0, 0, self.weights, 0.0, 0,
                           failed=reason_failed)
        return StepResult(self.box, 0.0, ctx)

    def step(self, frame: Frame) -> StepResult:
        """Process one frame; returns the new state and frame diagnostics."""
        if self.box is None:
            raise RuntimeError("start() must run before step()")
        cfg = self.cfg
        self.t += 1
        extractor = PatchFeatureExtractor(frame, cfg.features)
        sigmas = self.sampler.sigmas_for(self.box, self.inflation)
        tau_in = max(self.tau, TAU_FLOOR)
        if self.mode == HYBRID:
            draws, stats = hybrid_batch(self.sampler, self.critic, extractor,
                                        self.box, self.short, tau_in, sigmas)
        else:
            draws, stats = gaussian_only_batch(self.sampler, extractor, self.box,
                                               self.short, sigmas)

        usable: list[SampleDraw] = [d for d in draws if d.features is not None]
        if not usable:
            return self._freeze(reason_failed=True)
        feats = np.stack([d.features for d in usable])
        s2 = self.long.score_many(feats)
        samples = [ScoredSample(d.motion, d.features, d.short_score, float(s2[i]), d.source)
                   for i, d in enumerate(usable)]

        tau_t = uncertainty_threshold([s.s1 for s in samples], cfg.m)
        q12, q21 = fuse_labels(samples, tau_t, self.weights, cfg.m)
        e1, e2, w1, w2 = compute_errors_weights(samples, cfg.epsilon)
        box, confidence = estimate_state(samples, self.box)

        if confidence > 0:
            # Learn only while the target is believed present; an
            # all-negative frame would teach both models that the
            # target's own appearance is background.
            labels = np.array([s.fused_label for s in samples], dtype=np.int64)
            self.short.update((feats[q12], labels[q12]))
            self.archive.append_frame(feats, labels)
            if self.t % cfg.delta == 0:
                ax, ay = self.archive.all_examples()
                _fit_until_separated(self.long, ax, ay, REFRESH_EPOCH_CAP)
            self.weights = (w1, w2)
            self.tau = tau_t
            self.box = box
            self.inflation = 1.0
        else:
            self.inflation = min(self.inflation * INFLATION_STEP, INFLATION_CAP)

        ctx = FrameContext(self.t, samples, tau_t, q12, q21, e1, e2, (w1, w2),
                           stats.accept_rate, stats.refills)
        return StepResult(self.box, confidence, ctx)
