import random
from fractions import Fraction as F

import pytest

from dpp.dist import Dist
from dpp.features import GammaWeights, embedded_relation, frequency_reward_relation, k_window_feature
from dpp.instances import late_risk, late_lexicographic, random_mfa_instance
from dpp.model import Interface
from dpp.preorders import (Cmp, FunctionRelation, TestsetSpec, build_testset, expected_utility_relation,
                           lexicographic_relation)
from dpp.representability import (affine_equivalence, fit_feature_reward, fit_utility, induced_order_agrees,
                                  solve_exact)

SMALL = TestsetSpec(seed=1, count=8)


@pytest.mark.parametrize("seed", range(5))
def test_recovers_expected_utility_up_to_affine_map(seed):
    rng = random.Random(seed)
    omega = [f"w{i}" for i in range(5)]
    u = {w: F(rng.randint(-6, 6), rng.randint(1, 3)) for w in omega}
    rel = expected_utility_relation(u)
    fit = fit_utility(rel, omega, SMALL)
    assert fit.representable
    if len(set(u.values())) > 1:
        assert affine_equivalence(u, fit.utility).equivalent
    assert induced_order_agrees(rel, fit.utility, build_testset(omega, SMALL).dists)


def test_permuted_domain_gives_same_order():
    omega = ["x", "y", "z", "v"]
    rel = expected_utility_relation({"x": 0, "y": 2, "z": 5, "v": 1})
    a = fit_utility(rel, omega, SMALL)
    b = fit_utility(rel, list(reversed(omega)), SMALL)
    dists = build_testset(omega, SMALL).dists
    assert induced_order_agrees(rel, a.utility, dists) and induced_order_agrees(rel, b.utility, dists)
    assert affine_equivalence(a.utility, b.utility).equivalent


def test_indifferent_relation_is_constant():
    fit = fit_utility(expected_utility_relation({"x": 1, "y": 1}), ["x", "y"], SMALL)
    assert fit.representable and set(fit.utility.values()) == {0}


def test_risk_relation_refuted_with_convexity_witness():
    dpp = late_risk()
    fit = fit_utility(dpp.relation, list(dpp.interface.trajectories()), SMALL)
    assert fit.verdict == "refuted-on-testset"
    w = fit.witness
    assert w["kind"] == "convexity" and w["unmixed"] is Cmp.LESS and w["mixed"] is not Cmp.LESS
    a, b = w["pair"]
    assert dpp.relation.compare(a, b) is w["mixed"]


def test_lexicographic_relation_refuted_with_mismatch():
    dpp = late_lexicographic()
    fit = fit_utility(dpp.relation, list(dpp.interface.trajectories()), SMALL)
    assert fit.verdict == "refuted-on-testset"
    assert fit.witness["kind"] in ("mismatch", "convexity")
    a, b = fit.witness["dists"][:2]
    assert dpp.relation.compare(a, b) is not Cmp.EQUIVALENT


def test_small_lexicographic_relation_is_refuted():
    u1 = {"x": 0, "y": 1, "z": 1}
    u2 = {"x": 0, "y": 0, "z": 1}
    rel = lexicographic_relation(u1, u2)
    fit = fit_utility(rel, ["x", "y", "z"], SMALL)
    assert fit.verdict == "refuted-on-testset"


def test_strict_cycle_is_infeasible():
    beats = {("r", "s"), ("s", "p"), ("p", "r")}

    def cmp(a, b):
        x, y = a.support[0], b.support[0]
        if x == y:
            return Cmp.EQUIVALENT
        return Cmp.GREATER if (x, y) in beats else Cmp.LESS

    fit = fit_utility(FunctionRelation(cmp), ["r", "p", "s"], SMALL)
    assert fit.verdict == "infeasible"
    chain = fit.witness["chain"]
    assert chain[0][0] == chain[-1][2] and any(rel == "<" for _, rel, _ in chain)
    for (x, _, y), (x2, _, _) in zip(chain, chain[1:]):
        assert y == x2


def test_affine_equivalence_cases():
    u = {"a": F(0), "b": F(1), "c": F(5, 2)}
    res = affine_equivalence(u, {k: 3 * v + 7 for k, v in u.items()})
    assert res.equivalent and (res.scale, res.shift) == (3, 7)
    inv = affine_equivalence(u, {k: -v for k, v in u.items()})
    assert not inv.equivalent and set(inv.witness) == {"a", "c"}
    bent = affine_equivalence(u, {"a": F(0), "b": F(2), "c": F(5, 2)})
    assert not bent.equivalent
    const = affine_equivalence({"a": F(1), "b": F(1)}, {"a": F(4), "b": F(4)})
    assert const.equivalent and const.shift == 3
    assert not affine_equivalence({"a": F(1)}, {"b": F(1)}).equivalent


def test_solve_exact():
    assert solve_exact([[F(1), F(1)], [F(1), F(-1)]], [F(3), F(1)]) == [2, 1]
    assert solve_exact([[F(1), F(1)], [F(2), F(2)]], [F(1), F(3)]) is None
    assert solve_exact([[F(1), F(2)]], [F(4)]) == [4, 0]


@pytest.mark.parametrize("seed", range(4))
def test_feature_reward_round_trip(seed):
    inst = random_mfa_instance(seed)
    iface = inst.dpp.interface
    omega = list(iface.trajectories())
    fit = fit_feature_reward(inst.dpp.relation, inst.phi, inst.gamma, omega, iface.actions, SMALL)
    assert fit.representable
    ts = build_testset(omega, SMALL).dists
    refit = embedded_relation(frequency_reward_relation(fit.utility), inst.phi, inst.gamma)
    for a in ts[:15]:
        for b in ts[-15:]:
            assert refit.compare(a, b) is inst.dpp.relation.compare(a, b)


def test_feature_reward_refutes_risk_relation():
    dpp = late_risk()
    iface = dpp.interface
    phi = k_window_feature(1, iface)
    fit = fit_feature_reward(dpp.relation, phi, GammaWeights.constant(2), list(iface.trajectories()),
                             iface.actions, SMALL)
    assert fit.verdict == "refuted-on-testset"
    assert fit.witness["kind"] in ("interpolation", "linear-dependency", "mismatch")


def test_only_last_step_weight_matters():
    iface = Interface(("o0", "o1"), ("a0", "a1"), 2)
    phi = k_window_feature(1, iface)
    g = GammaWeights((F(0), F(1)))
    r = {(x, a): F(i) for i, (x, a) in enumerate((x, a) for x in phi.features for a in iface.actions)}
    rel = embedded_relation(frequency_reward_relation(r), phi, g)
    fit = fit_feature_reward(rel, phi, g, list(iface.trajectories()), iface.actions, SMALL)
    assert fit.representable
    w1 = ("o0", "a0", "o0", "a1", "o1")
    w2 = ("o1", "a1", "o0", "a1", "o0")
    assert rel.compare(Dist.point(w1), Dist.point(w2)) is Cmp.EQUIVALENT
