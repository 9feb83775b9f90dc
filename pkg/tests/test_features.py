import random
import warnings
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from dpp.dist import Dist
from dpp.errors import ContractError, DomainError
from dpp.features import (GammaWeights, check_markov_feature, embedded_relation, enumerate_feature_policies,
                          feature_policy_exists, frequency, frequency_optimal_sets, frequency_reward_relation,
                          future_frequency_holds, identity_feature, is_feature_based, k_window_feature,
                          lifted_history_reward, plan_frequency, recheck_mfa_witness, table_feature)
from dpp.instances import history_dependent, random_mfa_instance, random_reward_dpp, repeat
from dpp.model import Interface, attainable
from dpp.planner import optimal_action_sets, plan_backward, verify_optimal
from dpp.preorders import Cmp, expected_reward_relation

IFACE3 = Interface(("o0", "o1"), ("a0", "a1"), 3)


def test_k_window_examples():
    phi = k_window_feature(2, IFACE3)
    assert phi(("o0", "a0", "o1", "a1", "o0")) == ("o1", "a1", "o0")
    assert phi(("o1",)) == ("o1",)
    assert k_window_feature(1, IFACE3)(("o0", "a0", "o1")) == ("o1",)
    for k in (0, 3, 1.5):
        with pytest.raises(DomainError):
            k_window_feature(k, IFACE3)


def test_table_feature_must_be_total():
    with pytest.raises(ContractError):
        table_feature(IFACE3, {("o0",): "x"})


def test_gamma_domain():
    for bad in ((), (F(-1),), (F(0), F(0))):
        with pytest.raises(DomainError):
            GammaWeights(bad)
    g = GammaWeights.geometric(3, F(1, 2))
    assert g.weights == (1, F(1, 2), F(1, 4)) and g.total(1, 3) == F(3, 4)


def test_dirac_frequency_is_visit_share():
    phi = k_window_feature(1, IFACE3)
    w = ("o0", "a1", "o0", "a1", "o1", "a0", "o0")
    f = frequency(phi, GammaWeights.constant(3), 0, 3, Dist.point(w))
    assert f == Dist({(("o0",), "a1"): F(2, 3), (("o1",), "a0"): F(1, 3)})


def test_zero_weight_window_has_no_frequency():
    phi = k_window_feature(1, IFACE3)
    w = ("o0", "a1", "o0", "a1", "o1", "a0", "o0")
    g = GammaWeights((F(1), F(0), F(0)))
    assert frequency(phi, g, 1, 3, Dist.point(w)) is None
    with pytest.raises(DomainError):
        frequency(phi, g, 2, 1, Dist.point(w))


_TRAJ = list(IFACE3.trajectories())
weights = st.lists(st.fractions(min_value=0, max_value=3, max_denominator=4), min_size=3, max_size=3).filter(any)
dists = st.dictionaries(st.sampled_from(_TRAJ), st.integers(1, 5), min_size=1, max_size=6).map(
    lambda m: Dist({w: F(v, sum(m.values())) for w, v in m.items()}))


@settings(max_examples=40)
@given(weights, dists, st.integers(0, 2))
def test_frequency_matches_definition_and_decomposes(ws, D, t):
    phi = k_window_feature(2, IFACE3)
    g = GammaWeights(tuple(ws))
    full = frequency(phi, g, 0, 3, D)
    assert full == oracles.frequency(phi, g.weights, 0, 3, D)
    assert sum(full.values()) == 1
    head, tail = frequency(phi, g, 0, t, D), frequency(phi, g, t, 3, D)
    mixed = {}
    for part, lo, hi in ((head, 0, t), (tail, t, 3)):
        if part is not None:
            for k, v in part.items():
                mixed[k] = mixed.get(k, 0) + g.total(lo, hi) / g.total(0, 3) * v
    assert Dist(mixed) == full


def test_embedded_relation_orders_by_frequency():
    phi = k_window_feature(1, IFACE3)
    r = {(x, a): F(int(a == "a1")) for x in phi.features for a in IFACE3.actions}
    # early a1 counts more under decreasing weights
    rel = embedded_relation(frequency_reward_relation(r), phi, GammaWeights.geometric(3, F(1, 2)))
    early = ("o0", "a1", "o0", "a0", "o0", "a0", "o0")
    late = ("o0", "a0", "o0", "a0", "o0", "a1", "o0")
    late_other = ("o0", "a0", "o1", "a0", "o1", "a1", "o1")
    assert rel.compare(Dist.point(early), Dist.point(late)) is Cmp.GREATER
    flat = embedded_relation(frequency_reward_relation(r), phi, GammaWeights.constant(3))
    assert flat.compare(Dist.point(early), Dist.point(late)) is Cmp.EQUIVALENT
    assert flat.compare(Dist.point(late), Dist.point(late_other)) is Cmp.EQUIVALENT


@pytest.mark.parametrize("seed", range(4))
def test_identity_feature_embeds_expected_reward(seed):
    inst = random_reward_dpp(seed, max_horizon=2)
    iface = inst.dpp.interface
    phi = identity_feature(iface)
    g = GammaWeights.constant(iface.horizon)
    rng = random.Random(seed)
    r = {(h, a): F(rng.randint(-3, 3)) for h in phi.features for a in iface.actions}
    emb = embedded_relation(frequency_reward_relation(r), phi, g)
    lin = expected_reward_relation(lifted_history_reward(phi, g, r), iface.horizon)
    trajs = list(iface.trajectories())[:8]
    ds = [Dist.point(w) for w in trajs] + [Dist.uniform(trajs)]
    for a in ds:
        for b in ds:
            assert emb.compare(a, b) is lin.compare(a, b)


@pytest.mark.parametrize("seed", range(6))
def test_mfa_holds_on_markov_instances(seed):
    inst = random_mfa_instance(seed)
    assert check_markov_feature(inst.dpp, inst.phi).holds
    assert oracles.mfa_holds(inst.dpp, inst.phi)


def test_mfa_violation_witness_rechecks():
    dpp, phi = history_dependent()
    rep = check_markov_feature(dpp, phi)
    assert rep.verdict == "violated" and rep.witness["clause"] == 1
    assert recheck_mfa_witness(dpp, phi, rep.witness)
    assert not oracles.mfa_holds(dpp, phi)
    assert check_markov_feature(dpp, identity_feature(dpp.interface)).holds


def test_identity_feature_always_admits_a_feature_policy():
    inst = random_reward_dpp(3)
    dpp = inst.dpp
    sets = optimal_action_sets(dpp, plan_backward(dpp).policy)
    res = feature_policy_exists(dpp, identity_feature(dpp.interface), sets)
    assert res.exists and verify_optimal(dpp, res.policy).optimal


def test_repeat_has_no_optimal_feature_policy():
    dpp, phi = repeat()
    sets = optimal_action_sets(dpp, plan_backward(dpp).policy)
    res = feature_policy_exists(dpp, phi, sets)
    assert not res.exists
    assert res.witness["t"] == 1 and len(res.witness["histories"]) == 2
    assert not any(verify_optimal(dpp, pol).optimal for _, pol in enumerate_feature_policies(dpp, phi))


def test_existence_requires_verified_sets():
    dpp, phi = repeat()
    with pytest.raises(ContractError):
        feature_policy_exists(dpp, phi, {"table": {}})


@pytest.mark.parametrize("seed", range(6))
def test_frequency_planner_on_markov_instances(seed):
    inst = random_mfa_instance(seed)
    dpp = inst.dpp
    res = plan_frequency(dpp, inst.rel_circ, inst.phi, inst.gamma)
    pi = res.policy
    assert res.extras["feature_based"] and res.extras["f2_mismatch"] == []
    assert is_feature_based(pi, inst.phi, attainable(dpp.env).decision_histories())
    assert verify_optimal(dpp, pi).optimal
    assert future_frequency_holds(dpp, pi, inst.rel_circ, inst.phi, inst.gamma) == []
    assert frequency_optimal_sets(dpp, pi, inst.rel_circ, inst.phi, inst.gamma) == res.extras["f_star"]
    sets = optimal_action_sets(dpp, pi)
    assert all(set(res.extras["f_star"][h]) <= set(sets.table[h]) for h in sets.table)
    assert feature_policy_exists(dpp, inst.phi, sets).exists


def test_zero_tail_makes_every_action_frequency_optimal():
    inst = random_mfa_instance(2, zero_tail=True)
    res = plan_frequency(inst.dpp, inst.rel_circ, inst.phi, inst.gamma)
    T = inst.dpp.interface.horizon
    last = [h for h in res.extras["f_star"] if len(h) == 2 * (T - 1) + 1]
    assert last and all(res.extras["f_star"][h] == inst.dpp.interface.actions for h in last)
    assert verify_optimal(inst.dpp, res.policy).optimal


def test_requesting_feature_policy_without_mfa_warns():
    dpp, phi = history_dependent()
    g = GammaWeights.constant(2)
    r = {(x, a): F(int(a == "a1")) for x in phi.features for a in dpp.interface.actions}
    with pytest.warns(RuntimeWarning):
        res = plan_frequency(dpp, frequency_reward_relation(r), phi, g, feature_based=True)
    assert not res.extras["feature_based"]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        plan_frequency(dpp, frequency_reward_relation(r), phi, g)
    with pytest.raises(ContractError):
        plan_frequency(dpp, frequency_reward_relation(r), phi, GammaWeights.constant(3))
