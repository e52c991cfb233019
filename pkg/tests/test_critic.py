"""Critic proposals: joint vectors, acceptance walk, fallback, reinforcement."""

import numpy as np
import pytest

from infotrack.critic import (Critic, CriticConfig, CriticProposeError,
                              joint_vector, motion_triple)
from infotrack.features import FeatureConfig, PatchFeatureExtractor
from infotrack.geometry import BoundingBox, Transformation, compose_batch
from infotrack.imaging import Frame
from infotrack.svm import BudgetedSvm
from oracles import BandScene


def make_critic(cfg=None, seed=0):
    return Critic(
        BudgetedSvm(c=10.0, gamma=0.7, budget=50),
        cfg or CriticConfig(),
        np.random.Generator(np.random.PCG64(seed)),
    )


def test_motion_triple_normalizes_by_box_size():
    box = BoundingBox(0.0, 0.0, 40.0, 20.0)
    triple = motion_triple(box, Transformation(20.0, 5.0, 0.1))
    assert triple == pytest.approx([0.5, 0.25, 0.1])


def test_joint_vector_appends_triple():
    feats = np.arange(6, dtype=np.float64)
    box = BoundingBox(0.0, 0.0, 10.0, 10.0)
    joint = joint_vector(feats, box, Transformation(0.0, 0.0, 0.0))
    assert joint.shape == (9,)
    assert np.array_equal(joint[:6], feats)
    assert np.array_equal(joint[6:], np.zeros(3))
    # a shift of half the box width shows up as 0.5 in the dx slot
    joint = joint_vector(feats, box, Transformation(5.0, 0.0, 0.0))
    assert joint[-3] == pytest.approx(0.5)


def test_propose_requires_positive_tau():
    scene = BandScene()
    critic = make_critic()
    for tau in (0.0, -0.5):
        with pytest.raises(ValueError, match="positive"):
            critic.propose_with(scene.extractor, scene.box, scene.short, tau,
                                (10.0, 10.0, 0.05))


def test_propose_is_deterministic_for_a_seed():
    scene = BandScene()
    results = []
    for _ in range(2):
        critic = make_critic(seed=42)
        res = critic.propose_with(scene.extractor, scene.box, scene.short,
                                  0.5, (24.0, 2.0, 0.01))
        results.append(res)
    a, b = results
    assert (a.motion.dx, a.motion.dy, a.motion.ds) == (b.motion.dx, b.motion.dy, b.motion.ds)
    assert a.short_score == b.short_score
    assert a.accepted == b.accepted


def test_accepted_proposal_is_inside_uncertainty_band():
    scene = BandScene()
    critic = make_critic(seed=1)
    hits = 0
    for _ in range(30):
        res = critic.propose_with(scene.extractor, scene.box, scene.short,
                                  BandScene.TAU, (24.0, 2.0, 0.01))
        assert 1 <= res.n_tested <= critic.cfg.max_rejects
        if res.accepted:
            hits += 1
            assert abs(res.short_score) < BandScene.TAU
            assert scene.in_band(res.motion.dx)
    assert hits > 0


def test_fallback_returns_best_rejected_candidate():
    # tau so small that nothing is ever accepted: the walk must return
    # the smallest |short score| among the first max_rejects by ranking
    scene = BandScene()
    cfg = CriticConfig(max_rejects=7)
    critic = make_critic(cfg=cfg, seed=9)
    tau = 1e-6

    replay = np.random.Generator(np.random.PCG64(9))
    draws = replay.normal(size=(cfg.candidates, 3)) * np.asarray((24.0, 2.0, 0.01))
    draws[:, 2] = np.clip(draws[:, 2], -np.log(2.0), np.log(2.0))

    res = critic.propose_with(scene.extractor, scene.box, scene.short, tau,
                              (24.0, 2.0, 0.01))
    assert not res.accepted
    assert res.n_tested == cfg.max_rejects

    boxes = compose_batch(scene.box, draws)
    valid = scene.extractor.valid_mask(boxes)
    feats = scene.extractor.extract_many(boxes[valid])
    ranking = critic.model.score_many(
        np.concatenate([feats, np.column_stack([
            draws[valid, 0] / scene.box.w,
            draws[valid, 1] / scene.box.h,
            draws[valid, 2],
        ])], axis=1))
    order = np.argsort(-ranking, kind="stable")[: cfg.max_rejects]
    short_scores = scene.short.score_many(feats[order])
    assert abs(res.short_score) == pytest.approx(np.min(np.abs(short_scores)), abs=1e-12)


def test_propose_raises_when_every_candidate_is_degenerate():
    frame = Frame(np.full((16, 16), 0.5))
    extractor = PatchFeatureExtractor(frame, FeatureConfig())
    box = BoundingBox(500.0, 500.0, 8.0, 8.0)
    critic = make_critic(seed=2)
    with pytest.raises(CriticProposeError, match="outside"):
        critic.propose_with(extractor, box, BudgetedSvm(), 0.5, (1.0, 1.0, 0.01))


def test_reinforce_labels_by_short_uncertainty():
    critic = make_critic()
    joint = np.zeros(8)
    critic.reinforce_with(joint, short_score=0.01, tau=0.1)
    assert critic.model.support_set[-1][1] == 1
    joint2 = np.full(8, 3.0)
    critic.reinforce_with(joint2, short_score=0.9, tau=0.1)
    assert critic.model.support_set[-1][1] == -1
    # the boundary is strict: |score| == tau counts as certain
    joint3 = np.full(8, -3.0)
    critic.reinforce_with(joint3, short_score=0.1, tau=0.1)
    assert critic.model.support_set[-1][1] == -1


def test_reinforce_respects_model_budget():
    critic = make_critic(cfg=CriticConfig(budget=6))
    critic.model = BudgetedSvm(c=10.0, gamma=0.7, budget=6)
    rng = np.random.default_rng(4)
    for _ in range(40):
        critic.reinforce_with(rng.normal(size=8), float(rng.normal()), 0.5)
        assert len(critic.model) <= 6


def test_config_validation():
    with pytest.raises(ValueError, match="pool"):
        CriticConfig(candidates=0)
    with pytest.raises(ValueError, match="max_rejects"):
        CriticConfig(max_rejects=0)


def test_resolve_sigmas_prefers_fixed_values():
    cfg = CriticConfig(sigma_dx=5.0)
    assert cfg.resolve_sigmas((1.0, 2.0, 3.0)) == (5.0, 2.0, 3.0)
    assert CriticConfig().resolve_sigmas((1.0, 2.0, 3.0)) == (1.0, 2.0, 3.0)


def test_reinforced_critic_prefers_the_uncertainty_band():
    # quick single-seed version of the learning experiment: after feeding
    # the critic labeled proposals, its acceptances should concentrate in
    # the band far more often than raw Gaussian draws land there
    scene = BandScene()
    critic = make_critic(seed=3)
    sigmas = (24.0, 2.0, 0.01)
    for _ in range(50):
        res = critic.propose_with(scene.extractor, scene.box, scene.short,
                                  BandScene.TAU, sigmas)
        critic.reinforce_with(res.joint, res.short_score, BandScene.TAU)

    hits = 0
    trials = 40
    for _ in range(trials):
        res = critic.propose_with(scene.extractor, scene.box, scene.short,
                                  BandScene.TAU, sigmas)
        if res.accepted and scene.in_band(res.motion.dx):
            hits += 1
    critic_rate = hits / trials

    gauss = np.random.Generator(np.random.PCG64(1003))
    dxs = gauss.normal(size=2000) * sigmas[0]
    gaussian_rate = float(np.mean([scene.in_band(dx) for dx in dxs]))
    assert critic_rate > gaussian_rate
    assert critic_rate >= 0.5
