import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from fuhst.aggregation import (TrustGaussRule, UniformRule, apply_ban_filter, make_rule,
                               trust_weighted_aggregate)
from fuhst.errors import ConfigurationError
from fuhst.learning import LearnerConfig, generate_synthetic_task, init_params, local_train


def test_ban_filter_examples():
    rec = {1: np.zeros(2), 2: np.ones(2), 3: np.full(2, 2.0)}
    assert apply_ban_filter(rec, []) == rec
    assert apply_ban_filter(rec, {1, 2, 3}) == {}
    assert sorted(apply_ban_filter(rec, {2})) == [1, 3]


def test_consensus_gives_own_and_full_trust():
    own = np.array([1.0, 2.0, 3.0])
    out = trust_weighted_aggregate(own, {4: own.copy(), 7: own.copy()}, round=1)
    assert np.array_equal(out.new_params, own)
    assert [a.weight for a in out.alerts] == [1.0, 1.0]
    assert [a.rated for a in out.alerts] == [4, 7]


def test_empty_received_keeps_own():
    own = np.array([0.5, -0.5])
    out = trust_weighted_aggregate(own, {}, round=3)
    assert np.array_equal(out.new_params, own) and out.alerts == []


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        trust_weighted_aggregate(np.zeros(3), {1: np.zeros(4)}, round=1)


def test_outlier_gets_low_weight():
    rng = np.random.default_rng(0)
    own = np.zeros(20)
    received = {j: rng.normal(size=20) for j in range(8)}
    spread = np.median([np.linalg.norm(u) for u in received.values()])
    received[8] = np.full(20, 10 * spread / np.sqrt(20))
    out = trust_weighted_aggregate(own, received, round=1)
    w = {a.rated: a.weight for a in out.alerts}
    assert w[8] < 0.5
    assert all(w[8] < w[j] for j in range(8))


def _benign_models(seed, n=9):
    cfg = LearnerConfig()
    data = generate_synthetic_task(n, 4, 16, 120, seed=seed)
    p0 = init_params(cfg, seed)
    return [local_train(p0, d, cfg, seed=seed * 100 + i) for i, d in enumerate(data)]


def test_sign_flipped_neighbor_has_minimum_weight():
    for seed in range(10):
        models = _benign_models(seed)
        own, rest = models[0], models[1:]
        received = {j: m for j, m in enumerate(rest)}
        received[0] = -rest[0]
        w = {a.rated: a.weight for a in trust_weighted_aggregate(own, received, 1).alerts}
        assert w[0] == min(w.values())


@pytest.mark.xfail(strict=True, reason="the Gaussian kernel with median scale gives the "
                   "median-distance neighbor weight exp(-1/2) ~ 0.61 by construction")
def test_benign_iid_weights_exceed_point_eight():
    for seed in range(20):
        models = _benign_models(seed)
        out = trust_weighted_aggregate(models[0], dict(enumerate(models[1:])), 1)
        assert all(a.weight > 0.8 for a in out.alerts)


def test_median_distance_neighbor_weight_is_fixed():
    models = _benign_models(0)
    rule = TrustGaussRule()
    w = rule.weights(models[0], list(range(8)), np.stack(models[1:]), 1)
    assert np.isclose(np.median(w), np.exp(-0.5), atol=1e-6)


def test_uniform_rule_is_plain_mean():
    own = np.array([0.0, 0.0])
    rec = {1: np.array([2.0, 0.0]), 2: np.array([4.0, 6.0])}
    out = trust_weighted_aggregate(own, rec, 1, rule=UniformRule())
    assert np.allclose(out.new_params, [2.0, 2.0])
    assert all(a.weight == 1.0 for a in out.alerts)


def test_rule_registry():
    assert isinstance(make_rule("trust_gauss"), TrustGaussRule)
    assert isinstance(make_rule("uniform"), UniformRule)
    with pytest.raises(ConfigurationError):
        make_rule("wfagg")
    with pytest.raises(ConfigurationError):
        make_rule("trust_gauss", scale=0.0)


stacks = st.integers(1, 6).flatmap(
    lambda n: arrays(np.float64, (n + 1, 4), elements=st.floats(-1e3, 1e3)))


@given(stacks, st.sampled_from(["trust_gauss", "uniform"]))
def test_alert_range_and_convexity(stack, rule):
    own, rest = stack[0], stack[1:]
    out = trust_weighted_aggregate(own, dict(enumerate(rest)), 1, rule=make_rule(rule))
    assert len(out.alerts) == len(rest)
    assert all(0.0 <= a.weight <= 1.0 for a in out.alerts)
    lo, hi = stack.min(axis=0), stack.max(axis=0)
    tol = 1e-9 * (1 + np.abs(stack).max())
    assert np.all(out.new_params >= lo - tol) and np.all(out.new_params <= hi + tol)
    assert np.all(np.isfinite(out.new_params))


@given(stacks, st.sets(st.integers(0, 5)))
def test_banned_senders_never_influence(stack, bans):
    own, rest = stack[0], stack[1:]
    received = apply_ban_filter(dict(enumerate(rest)), bans)
    out = trust_weighted_aggregate(own, received, 1)
    assert not {a.rated for a in out.alerts} & bans
    perturbed = {j: (u if j not in bans else u + 1e6) for j, u in enumerate(rest)}
    out2 = trust_weighted_aggregate(own, apply_ban_filter(perturbed, bans), 1)
    assert np.array_equal(out.new_params, out2.new_params)
