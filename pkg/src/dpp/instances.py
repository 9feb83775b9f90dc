"""Small built-in decision processes and seeded random generators.

The built-ins are deliberately tiny so exhaustive checks stay fast:

* ``no_optimal``: two observations, two actions, horizon two, fair-coin
  observations, ranked by a performance that rewards ``a1`` only inside the
  cylinder of ``(o0, a0, o0)``.  It has no optimal policy.
* ``late_risk``: a deterministic environment where a late ``a1`` triggers a
  risky observation; ranked by the risk-averse relation.
* ``late_lexicographic``: the same environment ranked lexicographically.
* ``repeat``: reward for repeating the first action, which no
  last-observation policy can do.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .dist import Dist
from .features import (FeatureMap, GammaWeights, embedded_relation, frequency_reward_relation,
                       k_window_feature)
from .model import DPP, Environment, Interface, action_at, length, prefix
from .preorders import (PerformanceRelation, expected_reward_relation, lexicographic_relation,
                        risk_relation)

O2 = ("o0", "o1")
A2 = ("a0", "a1")


def count_action(w, a: str = "a1") -> int:
    return sum(1 for t in range(length(w)) if action_at(w, t) == a)


# -- an instance without any optimal policy ------------------------------------

CYLINDER_ROOT = ("o0", "a0", "o0")


def cylinder_performance(interface: Interface):
    """``E[#a1]`` on distributions inside the cylinder of ``(o0, a0, o0)``, ``-E[#a1]`` elsewhere."""
    def phi(d: Dist) -> Fraction:
        mean = d.expect(count_action)
        inside = all(prefix(w, 1) == CYLINDER_ROOT for w in d)
        return mean if inside else -mean
    return phi


def no_optimal() -> DPP:
    iface = Interface(O2, A2, 2)
    env = Environment(iface, Dist.point("o0"), lambda h, a: Dist.uniform(O2))
    return DPP(iface, env, PerformanceRelation(cylinder_performance(iface)))


# -- risk and tie-breaking examples ---------------------------------------------

def _late_risk_env() -> Environment:
    """``a1`` at the last step leads to ``o1``; everything else leads to ``o0``."""
    iface = Interface(O2, A2, 2)

    def rho(h, a):
        return Dist.point("o1" if a == "a1" and length(h) == 1 else "o0")

    return Environment(iface, Dist.point("o0"), rho)


def late_risk(beta=-1) -> DPP:
    """Utility counts ``a1``; trajectories ending in ``o1`` form the risky event."""
    env = _late_risk_env()
    iface = env.interface
    omega = list(iface.trajectories())
    u = {w: Fraction(count_action(w)) for w in omega}
    event = [w for w in omega if w[-1] == "o1"]
    return DPP(iface, env, risk_relation(u, beta, event, omega))


def late_lexicographic() -> DPP:
    """First objective: ``a1`` at the start; ties broken by ``a1`` at the last step."""
    env = _late_risk_env()
    iface = env.interface
    omega = list(iface.trajectories())
    u1 = {w: Fraction(int(action_at(w, 0) == "a1")) for w in omega}
    u2 = {w: Fraction(int(action_at(w, 1) == "a1")) for w in omega}
    return DPP(iface, env, lexicographic_relation(u1, u2))


def repeat() -> tuple[DPP, FeatureMap]:
    """Unit reward for repeating the first action; one observation, so histories collapse."""
    iface = Interface(("o0",), A2, 2)
    env = Environment(iface, Dist.point("o0"), lambda h, a: Dist.point("o0"))

    def r(h):
        return Fraction(int(length(h) == 2 and h[1] == h[3]))

    return DPP(iface, env, expected_reward_relation(r, 2)), k_window_feature(1, iface)


def history_dependent() -> tuple[DPP, FeatureMap]:
    """Transitions that remember the first action; a last-observation feature hides it."""
    iface = Interface(O2, A2, 2)

    def rho(h, a):
        if length(h) == 0:
            return Dist.point("o0")
        return Dist.point("o1" if h[1] == "a1" else "o0")

    env = Environment(iface, Dist.point("o0"), rho)
    r = {w: Fraction(count_action(w)) for w in iface.trajectories()}
    return DPP(iface, env, expected_reward_relation(lambda h: r.get(h, Fraction(0)), 2)), \
        k_window_feature(1, iface)


# -- seeded random instances -----------------------------------------------------

def random_fraction(rng: random.Random, lo: int = -5, hi: int = 5, max_den: int = 4) -> Fraction:
    return Fraction(rng.randint(lo * max_den, hi * max_den), rng.randint(1, max_den))


def random_dist(rng: random.Random, symbols, max_den: int = 4, sparse: bool = True) -> Dist:
    symbols = list(symbols)
    k = rng.randint(1, len(symbols)) if sparse else len(symbols)
    chosen = sorted(rng.sample(range(len(symbols)), k))
    weights = [rng.randint(1, max_den) for _ in chosen]
    total = sum(weights)
    return Dist({symbols[i]: Fraction(w, total) for i, w in zip(chosen, weights)})


def _symbols(prefix_: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix_}{i}" for i in range(n))


@dataclass
class RewardInstance:
    dpp: DPP
    reward: dict


def random_reward_dpp(seed: int, max_obs: int = 3, max_actions: int = 3, max_horizon: int = 3) -> RewardInstance:
    """History-dependent random transitions and a random history reward, all tabulated."""
    rng = random.Random(seed)
    iface = Interface(_symbols("o", rng.randint(1, max_obs)), _symbols("a", rng.randint(2, max_actions)),
                      rng.randint(1, max_horizon))
    rho0 = random_dist(rng, iface.observations)
    table = {}
    frontier = [(o,) for o in rho0]
    for _ in range(iface.horizon):
        nxt = []
        for h in frontier:
            for a in iface.actions:
                d = random_dist(rng, iface.observations)
                table[(h, a)] = d
                nxt.extend(h + (a, o) for o in d)
        frontier = nxt
    env = Environment.from_table(iface, rho0, table)
    reward = {h: random_fraction(rng) for h in iface.all_histories()}
    return RewardInstance(DPP(iface, env, expected_reward_relation(reward, iface.horizon)), reward)


@dataclass
class FeatureInstance:
    dpp: DPP
    phi: FeatureMap
    gamma: GammaWeights
    reward: dict  # (feature, action) -> Fraction

    @property
    def rel_circ(self):
        return self.dpp.relation.rel_circ


def random_mfa_instance(seed: int, max_obs: int = 3, max_actions: int = 3, max_horizon: int = 3,
                        zero_tail: bool = False) -> FeatureInstance:
    """Transitions depend on ``(t, last observation, action)`` only, so the last-observation feature is Markov."""
    rng = random.Random(seed)
    iface = Interface(_symbols("o", rng.randint(2, max_obs)), _symbols("a", rng.randint(2, max_actions)),
                      rng.randint(2, max_horizon))
    kernel = {(t, o, a): random_dist(rng, iface.observations)
              for t in range(iface.horizon) for o in iface.observations for a in iface.actions}
    env = Environment(iface, random_dist(rng, iface.observations),
                      lambda h, a: kernel[(length(h), h[-1], a)])
    phi = k_window_feature(1, iface)
    weights = [Fraction(rng.randint(0, 4), rng.randint(1, 3)) for _ in range(iface.horizon)]
    if zero_tail:
        weights[-1] = Fraction(0)
        weights[0] = weights[0] or Fraction(1)
    if not any(weights):
        weights[0] = Fraction(1)
    gamma = GammaWeights(tuple(weights))
    reward = {(x, a): random_fraction(rng) for x in phi.features for a in iface.actions}
    rel = embedded_relation(frequency_reward_relation(reward), phi, gamma)
    return FeatureInstance(DPP(iface, env, rel), phi, gamma, reward)


BUILTIN_CASES = ("prop13", "example13", "example26")
