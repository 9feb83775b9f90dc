"""Feature maps, (phi, gamma)-frequencies and feature-based planning.

A feature map compresses histories; a feature-based policy acts the same
on equal-length histories with equal features, so it is stored keyed by
``(t, phi(h))``.  Weighted visit counts are kept unnormalized internally so
that they add across time windows; :func:`frequency` divides by the total
weight at the end.
"""

from __future__ import annotations

import itertools
import warnings
from collections.abc import Callable, Hashable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .dist import ZERO, Dist, as_fraction
from .errors import ContractError, DomainError
from .model import (DPP, History, Interface, OutcomeCache, Policy, action_at, attainable,
                    history_key, length, prefix)
from .planner import PlanResult, select_lub, verify_optimal
from .preorders import Cmp, PreferenceRelation, UtilityRelation


class FeatureMap:
    """A total map from histories to a finite ordered feature set."""

    def __init__(self, fn: Callable[[History], Hashable], features: Sequence[Hashable],
                 description: dict | None = None):
        self._fn = fn
        self.features = tuple(features)
        self._known = frozenset(self.features)
        self.description = description or {"kind": "custom"}

    def __call__(self, h: History) -> Hashable:
        x = self._fn(h)
        if x not in self._known:
            raise ContractError(f"feature {x!r} of {history_key(h)!r} is not in the feature set")
        return x

    def check_total(self, interface: Interface) -> None:
        for h in interface.all_histories():
            self(h)


def k_window_feature(k: int, interface: Interface) -> FeatureMap:
    """The last ``k`` observations and ``k - 1`` actions, or the whole history if shorter.

    Features are themselves (short) histories, so ``k = 1`` yields the
    one-element tuple holding the latest observation.
    """
    if not isinstance(k, int) or not 1 <= k < interface.horizon:
        raise DomainError(f"window size must satisfy 1 <= k < {interface.horizon}, got {k!r}")
    width = 2 * k - 1
    feats = [h for t in range(k) for h in interface.histories(t)]
    return FeatureMap(lambda h: h if len(h) <= width else h[-width:], feats,
                      {"kind": "k_window", "k": k})


def identity_feature(interface: Interface) -> FeatureMap:
    return FeatureMap(lambda h: h, list(interface.all_histories()), {"kind": "identity"})


def table_feature(interface: Interface, table: Mapping[History, Hashable]) -> FeatureMap:
    """Feature map given history by history; must cover every history up to the horizon."""
    table = dict(table)
    missing = [h for h in interface.all_histories() if h not in table]
    if missing:
        raise ContractError(f"feature table misses history {history_key(missing[0])!r}")
    feats = list(dict.fromkeys(table[h] for h in interface.all_histories()))
    return FeatureMap(table.__getitem__, feats,
                      {"kind": "table", "map": {history_key(h): x for h, x in table.items()}})


@dataclass(frozen=True)
class GammaWeights:
    """Nonnegative time weights ``gamma_0 .. gamma_{T-1}``, not all zero."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        w = tuple(as_fraction(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not w:
            raise DomainError("gamma needs at least one weight")
        if any(x < 0 for x in w):
            raise DomainError("gamma weights must be nonnegative")
        if not any(w):
            raise DomainError("gamma weights must not all be zero")

    @classmethod
    def constant(cls, horizon: int, value=1) -> GammaWeights:
        return cls((as_fraction(value),) * horizon)

    @classmethod
    def geometric(cls, horizon: int, ratio) -> GammaWeights:
        ratio = as_fraction(ratio)
        return cls(tuple(ratio ** t for t in range(horizon)))

    def __len__(self):
        return len(self.weights)

    def total(self, t1: int, t2: int) -> Fraction:
        """``Gamma_{t1:t2}``, the weight summed over ``t1 <= t < t2``."""
        return sum(self.weights[t1:t2], ZERO)


def _check_window(gamma: GammaWeights, t1: int, t2: int) -> None:
    if not 0 <= t1 <= t2 <= len(gamma):
        raise DomainError(f"need 0 <= t1 <= t2 <= {len(gamma)}, got t1={t1}, t2={t2}")


def weighted_visits(phi: FeatureMap, gamma: GammaWeights, t1: int, t2: int, D: Dist) -> dict:
    """``sum_{t1 <= t < t2} gamma_t P_D((X_t, A_t) = (x, a))`` per feature-action pair."""
    _check_window(gamma, t1, t2)
    out: dict = {}
    for w, p in D.items():
        if length(w) != len(gamma):
            raise ContractError(f"{history_key(w)!r} is not a full trajectory for this gamma")
        for t in range(t1, t2):
            g = gamma.weights[t]
            if g:
                key = (phi(prefix(w, t)), action_at(w, t))
                out[key] = out.get(key, ZERO) + g * p
    return out


def normalize_visits(visits: Mapping, total: Fraction) -> Dist | None:
    if not total:
        return None
    return Dist({k: v / total for k, v in visits.items() if v}, _checked=True)


def frequency(phi: FeatureMap, gamma: GammaWeights, t1: int, t2: int, D: Dist) -> Dist | None:
    """The (phi, gamma)-frequency over ``[t1, t2)``; ``None`` is the zero element when the window has no weight."""
    return normalize_visits(weighted_visits(phi, gamma, t1, t2, D), gamma.total(t1, t2))


class EmbeddedRelation(PreferenceRelation):
    """Compares trajectory distributions through their full-horizon frequencies."""

    kind = "frequency_embedded"

    def __init__(self, rel_circ: PreferenceRelation, phi: FeatureMap, gamma: GammaWeights):
        self.rel_circ = rel_circ
        self.phi = phi
        self.gamma = gamma
        self._freq: dict = {}

    def frequency(self, d: Dist) -> Dist:
        f = self._freq.get(d)
        if f is None:
            f = frequency(self.phi, self.gamma, 0, len(self.gamma), d)
            self._freq[d] = f
        return f

    def compare(self, a, b):
        return self.rel_circ.compare(self.frequency(a), self.frequency(b))

    def interpolation_candidates(self, a, b, c):
        # frequency is affine in the distribution, so mixtures map to mixtures
        return self.rel_circ.interpolation_candidates(self.frequency(a), self.frequency(b),
                                                      self.frequency(c))


def embedded_relation(rel_circ: PreferenceRelation, phi: FeatureMap, gamma: GammaWeights) -> EmbeddedRelation:
    return EmbeddedRelation(rel_circ, phi, gamma)


def frequency_reward_relation(r: Mapping) -> UtilityRelation:
    """Linear relation on feature-action distributions: expected ``r(x, a)``."""
    rel = UtilityRelation(dict(r))
    rel.kind = "frequency_reward"
    return rel


def lifted_history_reward(phi: FeatureMap, gamma: GammaWeights, r: Mapping) -> Callable[[History], Fraction]:
    """History reward whose cumulative sum equals ``sum_t gamma_t r(phi(H_t), A_t)``.

    The term for step ``t`` is paid on the history of length ``t + 1``, the
    first one that contains ``A_t``.
    """
    def reward(h):
        t = length(h) - 1
        if t < 0:
            return ZERO
        g = gamma.weights[t]
        return g * as_fraction(r.get((phi(prefix(h, t)), action_at(h, t)), 0)) if g else ZERO
    return reward


# -- Markov feature assumption -----------------------------------------------

@dataclass(frozen=True)
class MfaReport:
    verdict: str  # "holds" | "violated"
    witness: dict | None = None

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


def feature_classes(dpp: DPP, phi: FeatureMap) -> list[tuple[int, Hashable, tuple[History, ...]]]:
    """Attainable decision histories grouped by ``(t, phi(h))``, in canonical order."""
    att = attainable(dpp.env)
    out = []
    for t, level in enumerate(att.levels[:-1]):
        groups: dict = {}
        for h in level:
            groups.setdefault(phi(h), []).append(h)
        out.extend((t, x, tuple(hs)) for x, hs in groups.items())
    return out


def check_markov_feature(dpp: DPP, phi: FeatureMap) -> MfaReport:
    """First violation of either MFA clause among attainable same-length histories."""
    iface, env = dpp.interface, dpp.env
    for _, _, hs in feature_classes(dpp, phi):
        h0 = hs[0]
        for h in hs[1:]:
            for a in iface.actions:
                if env.rho(h0, a) != env.rho(h, a):
                    return MfaReport("violated", {"clause": 1, "histories": (h0, h), "action": a})
            for a, o in itertools.product(iface.actions, iface.observations):
                if phi(h0 + (a, o)) != phi(h + (a, o)):
                    return MfaReport("violated", {"clause": 2, "histories": (h0, h),
                                                  "action": a, "observation": o})
    return MfaReport("holds")


def recheck_mfa_witness(dpp: DPP, phi: FeatureMap, witness: Mapping) -> bool:
    h0, h = witness["histories"]
    if phi(h0) != phi(h) or length(h0) != length(h):
        return False
    if witness["clause"] == 1:
        return dpp.env.rho(h0, witness["action"]) != dpp.env.rho(h, witness["action"])
    a, o = witness["action"], witness["observation"]
    return phi(h0 + (a, o)) != phi(h + (a, o))


# -- feature-based policies --------------------------------------------------

def feature_policy(phi: FeatureMap, table: Mapping[tuple[int, Hashable], str], default: str) -> Policy:
    """Deterministic policy choosing ``table[(t, phi(h))]``, or ``default`` for unlisted classes."""
    table = dict(table)

    def rule(h):
        return Dist.point(table.get((length(h), phi(h)), default))

    pol = Policy(rule)
    pol.feature_table = table
    return pol


def is_feature_based(pi: Policy, phi: FeatureMap, histories) -> bool:
    """Whether ``pi`` has equal conditionals across every ``(t, phi)`` class among ``histories``."""
    seen: dict = {}
    for h in histories:
        key = (length(h), phi(h))
        d = pi(h)
        if seen.setdefault(key, d) != d:
            return False
    return True


@dataclass(frozen=True)
class FeatureExistence:
    exists: bool
    policy: Policy | None = None
    table: dict | None = None
    witness: dict | None = None


def feature_policy_exists(dpp: DPP, phi: FeatureMap, sets) -> FeatureExistence:
    """Intersect optimal action sets over each feature class; build a policy if none is empty."""
    if not getattr(sets, "verified", False):
        raise ContractError("optimal action sets must come from a verified optimal policy")
    iface = dpp.interface
    table = {}
    for t, x, hs in feature_classes(dpp, phi):
        common = [a for a in iface.actions if all(a in sets.table[h] for h in hs)]
        if not common:
            return FeatureExistence(False, witness={"t": t, "feature": x, "histories": hs,
                                                    "sets": {h: sets.table[h] for h in hs}})
        table[(t, x)] = common[0]
    pol = feature_policy(phi, table, iface.actions[0])
    if not verify_optimal(dpp, pol).optimal:
        raise ContractError("constructed feature-based policy failed verification; "
                            "the relation is not a total consistent preorder here")
    return FeatureExistence(True, pol, table)


def enumerate_feature_policies(dpp: DPP, phi: FeatureMap):
    """Every deterministic feature-based policy, as ``(table, Policy)``, over attainable classes."""
    keys = [(t, x) for t, x, _ in feature_classes(dpp, phi)]
    acts = dpp.interface.actions
    for choice in itertools.product(acts, repeat=len(keys)):
        table = dict(zip(keys, choice))
        yield table, feature_policy(phi, table, acts[0])


# -- frequency planner -------------------------------------------------------

def _add_scaled(acc: dict, visits: Mapping, w: Fraction) -> None:
    for k, v in visits.items():
        acc[k] = acc.get(k, ZERO) + w * v


def plan_frequency(dpp: DPP, rel_circ: PreferenceRelation, phi: FeatureMap, gamma: GammaWeights,
                   feature_based: bool | None = None) -> PlanResult:
    """Backward induction on future feature-action frequencies.

    At each attainable ``h_t`` the chosen action maximizes, under
    ``rel_circ``, the frequency over ``[t, T)`` of the continuation.  When
    the remaining weight is zero every action qualifies.  Future visits are
    accumulated bottom-up so no trajectory distribution is ever expanded.

    With ``feature_based`` left as ``None`` the policy is feature-based
    exactly when the Markov feature assumption holds; asking for it when
    the assumption fails emits a warning and returns a history-indexed
    policy instead.
    """
    iface, env = dpp.interface, dpp.env
    T = iface.horizon
    if len(gamma) != T:
        raise ContractError(f"gamma has {len(gamma)} weights, horizon is {T}")
    att = attainable(env)
    mfa = check_markov_feature(dpp, phi)
    per_class = mfa.holds if feature_based is None else feature_based
    if per_class and not mfa.holds:
        warnings.warn("Markov feature assumption is violated; returning a history-indexed policy",
                      RuntimeWarning, stacklevel=2)
        per_class = False

    # W[h]: unnormalized visits over [len(h), T) of the continuation from h
    W: dict = {h: {} for h in att.trajectories}
    actions: dict = {}
    f_star: dict = {}
    certs: dict = {}
    cont_visits: dict = {}
    f2_mismatch = []
    for t in reversed(range(T)):
        rest = gamma.total(t, T)
        level_sets = {}
        for h in att.levels[t]:
            x = phi(h)
            vis = {}
            for a in iface.actions:
                acc = {(x, a): gamma.weights[t]} if gamma.weights[t] else {}
                for _, p, c in env.successors(h, a):
                    _add_scaled(acc, W[c], p)
                vis[a] = acc
            cont_visits[h] = vis
            if rest:
                freqs = {a: normalize_visits(vis[a], rest) for a in iface.actions}
                lubs, row = select_lub(rel_circ, freqs, iface.actions, h)
                certs[h] = row
            else:
                lubs = list(iface.actions)
                certs[h] = {a: Cmp.EQUIVALENT for a in iface.actions}
            level_sets[h] = tuple(lubs)
        f_star.update(level_sets)
        if per_class:
            groups: dict = {}
            for h in att.levels[t]:
                groups.setdefault(phi(h), []).append(h)
            for x, hs in groups.items():
                if any(level_sets[h] != level_sets[hs[0]] for h in hs):
                    f2_mismatch.append((t, x, tuple(hs)))
                common = [a for a in iface.actions if all(a in level_sets[h] for h in hs)]
                if not common:
                    raise ContractError(f"no common frequency-optimal action in feature class {x!r} at t={t}")
                for h in hs:
                    actions[h] = common[0]
        else:
            for h in att.levels[t]:
                actions[h] = level_sets[h][0]
        for h in att.levels[t]:
            W[h] = cont_visits[h][actions[h]]

    if per_class:
        table = {(length(h), phi(h)): a for h, a in actions.items()}
        policy = feature_policy(phi, table, iface.actions[0])
    else:
        policy = Policy.deterministic(actions, default=iface.actions[0])
    extras = {"f_star": f_star, "feature_based": per_class, "mfa": mfa,
              "f2_mismatch": f2_mismatch, "future_visits": W}
    return PlanResult(policy, actions, certs, extras)


def future_frequency_holds(dpp: DPP, pi: Policy, rel_circ: PreferenceRelation, phi: FeatureMap,
                           gamma: GammaWeights) -> list[tuple[History, str]]:
    """Attainable ``(h, a)`` where the continuation frequency beats the policy's own; empty when it holds."""
    env, iface = dpp.env, dpp.interface
    T = iface.horizon
    cache = OutcomeCache(env, pi)
    bad = []
    for h in attainable(env).decision_histories():
        t = length(h)
        if not gamma.total(t, T):
            continue
        mine = frequency(phi, gamma, t, T, cache.of(h))
        for a in iface.actions:
            other = frequency(phi, gamma, t, T, cache.after_action(h, a))
            if not rel_circ.compare(mine, other).geq:
                bad.append((h, a))
    return bad


def frequency_optimal_sets(dpp: DPP, pi: Policy, rel_circ: PreferenceRelation, phi: FeatureMap,
                           gamma: GammaWeights) -> dict[History, tuple[str, ...]]:
    """``F*_pi(h)`` recomputed directly from trajectory distributions (no memoized visits)."""
    env, iface = dpp.env, dpp.interface
    T = iface.horizon
    cache = OutcomeCache(env, pi)
    out = {}
    for h in attainable(env).decision_histories():
        t = length(h)
        if not gamma.total(t, T):
            out[h] = iface.actions
            continue
        fr = {a: frequency(phi, gamma, t, T, cache.after_action(h, a)) for a in iface.actions}
        out[h] = tuple(a for a in iface.actions
                       if all(rel_circ.compare(fr[a], fr[b]).geq for b in iface.actions))
    return out


def action_lub_sets(dpp: DPP, pi: Policy) -> dict[History, tuple[str, ...]]:
    """``A*_pi(h)`` under the process's own relation, for any policy (verified or not)."""
    env, iface, rel = dpp.env, dpp.interface, dpp.relation
    cache = OutcomeCache(env, pi)
    out = {}
    for h in attainable(env).decision_histories():
        cont = {a: cache.after_action(h, a) for a in iface.actions}
        out[h] = tuple(a for a in iface.actions
                       if all(rel.compare(cont[a], cont[b]).geq for b in iface.actions))
    return out


__all__ = [
    "FeatureMap", "k_window_feature", "identity_feature", "table_feature", "GammaWeights",
    "weighted_visits", "frequency", "EmbeddedRelation", "embedded_relation",
    "frequency_reward_relation", "lifted_history_reward", "MfaReport", "check_markov_feature",
    "recheck_mfa_witness", "feature_classes", "feature_policy", "is_feature_based",
    "FeatureExistence", "feature_policy_exists", "enumerate_feature_policies", "plan_frequency",
    "future_frequency_holds", "frequency_optimal_sets", "action_lub_sets",
]
