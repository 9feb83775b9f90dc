"""Ordinal backward induction and optimality checks.

Everything here only talks to the preference relation through
``compare``; no numeric value function is assumed except in
:func:`value_iteration`, which exists as an independent cross-check for
reward-expressed relations.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .dist import ZERO, Dist, mixture
from .errors import ContractError, LimitExceededError, RelationNotTotalError
from .model import DPP, History, OutcomeCache, Policy, attainable, history_key, length
from .preorders import Cmp, PreferenceRelation


@dataclass
class PlanResult:
    """A deterministic policy plus, per attainable decision history, the chosen
    action and how its continuation compares with every alternative."""

    policy: Policy
    actions: dict[History, str]
    certificates: dict[History, dict[str, Cmp]]
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class OptimalityVerdict:
    verdict: str  # "optimal" | "refuted" | "relation-not-total"
    witness: dict | None = None
    scope: str = "local"

    @property
    def optimal(self) -> bool:
        return self.verdict == "optimal"


@dataclass(frozen=True)
class OptimalActionSets:
    table: dict[History, tuple[str, ...]]
    verified: bool = False

    def __getitem__(self, h):
        return self.table[h]


def select_lub(rel: PreferenceRelation, cont: Mapping[str, Dist], order: Sequence[str],
               history: History | None = None) -> tuple[list[str], dict[str, Cmp]]:
    """Actions whose continuation is a least upper bound, in ``order``.

    Uses a running maximum and then confirms it against every action; only
    if that fails is the full pairwise table built.  Returns the lub actions
    and the comparison row of the first one against all actions.
    """
    best = order[0]
    for a in order[1:]:
        c = rel.compare(cont[a], cont[best])
        if c is Cmp.INCOMPARABLE:
            raise RelationNotTotalError((cont[a], cont[best]), "incomparable",
                                        {"history": history, "actions": (a, best)})
        if c is Cmp.GREATER:
            best = a
    row = {a: rel.compare(cont[best], cont[a]) for a in order}
    if all(c.geq for c in row.values()):
        lubs = [a for a in order if a == best or rel.compare(cont[a], cont[best]).geq
                and all(rel.compare(cont[a], cont[b]).geq for b in order)]
    else:
        full = {(a, b): rel.compare(cont[a], cont[b]) for a in order for b in order}
        for (a, b), c in full.items():
            if c is Cmp.INCOMPARABLE:
                raise RelationNotTotalError((cont[a], cont[b]), "incomparable",
                                            {"history": history, "actions": (a, b)})
        lubs = [a for a in order if all(full[a, b].geq for b in order)]
        if not lubs:
            raise RelationNotTotalError((cont[best], cont[order[0]]), "intransitive",
                                        {"history": history, "actions": tuple(order)})
    first = lubs[0]
    row = {a: rel.compare(cont[first], cont[a]) for a in order}
    return lubs, row


def plan_backward(dpp: DPP, action_order: Sequence[str] | None = None) -> PlanResult:
    """Deterministic policy picking, latest decisions first, the first lub action.

    The relation is not checked for consistency here; a relation that is
    total on the compared pairs always plans, and :func:`verify_optimal`
    decides whether the result is actually optimal.
    """
    iface, env, rel = dpp.interface, dpp.env, dpp.relation
    order = tuple(action_order) if action_order is not None else iface.actions
    if sorted(order) != sorted(iface.actions):
        raise ContractError("action_order must be a permutation of the interface actions")
    att = attainable(env)
    D: dict = {h: Dist.point(h) for h in att.trajectories}
    actions: dict = {}
    certs: dict = {}
    for t in reversed(range(iface.horizon)):
        for h in att.levels[t]:
            cont = {a: mixture((p, D[c]) for _, p, c in env.successors(h, a)) for a in order}
            lubs, row = select_lub(rel, cont, order, h)
            actions[h] = lubs[0]
            certs[h] = row
            D[h] = cont[lubs[0]]
    policy = Policy.deterministic(actions, default=order[0])
    return PlanResult(policy, actions, certs)


# -- exhaustive competitors --------------------------------------------------

def subtree_distributions(dpp: DPP, limit: int = 20, max_combinations: int = 500_000) -> dict:
    """For every attainable history, each distinct ``D^sigma(h)`` over deterministic
    subtree policies ``sigma``, mapped to the first assignment producing it."""
    env, iface = dpp.env, dpp.interface
    att = attainable(env)
    n_dec = len(att.decision_histories())
    if n_dec > limit:
        raise LimitExceededError(n_dec, limit)
    S: dict = {h: {Dist.point(h): ()} for h in att.trajectories}
    for t in reversed(range(iface.horizon)):
        for h in att.levels[t]:
            out: dict = {}
            for a in iface.actions:
                succ = list(env.successors(h, a))
                n = 1
                for _, _, c in succ:
                    n *= len(S[c])
                if n > max_combinations:
                    raise LimitExceededError(n, max_combinations, "subtree policy combinations")
                for combo in itertools.product(*(S[c].items() for _, _, c in succ)):
                    d = mixture((p, dc) for (_, p, _), (dc, _) in zip(succ, combo))
                    if d not in out:
                        out[d] = ((h, a),) + tuple(itertools.chain.from_iterable(s for _, s in combo))
            S[h] = out
    return S


def _maximal(rel: PreferenceRelation, dists: list[Dist]) -> tuple[set, tuple | None]:
    """Elements that are >= every other element, plus an incomparable pair if seen."""
    bad = None
    best = dists[0]
    for d in dists[1:]:
        c = rel.compare(d, best)
        if c is Cmp.GREATER:
            best = d
        elif c is Cmp.INCOMPARABLE and bad is None:
            bad = (d, best)
    cands = [d for d in dists if d is best or rel.compare(d, best).geq]
    out = set()
    for d in cands:
        ok = True
        for e in dists:
            c = rel.compare(d, e)
            if c is Cmp.INCOMPARABLE and bad is None:
                bad = (d, e)
            if not c.geq:
                ok = False
                break
        if ok:
            out.add(d)
    return out, bad


@dataclass
class BruteForceResult:
    optimal: list[dict[History, str]]
    n_policies: int
    decision_histories: list[History]
    certificate: list[dict] | None
    caveat: str
    incomparable: tuple | None = None

    @property
    def exists(self) -> bool:
        return bool(self.optimal)


def _policy_outcomes(env, actions: Mapping[History, str], histories) -> dict:
    cache = OutcomeCache(env, Policy.deterministic(actions))
    return {h: cache.of(h) for h in histories}


def brute_force_optimal(dpp: DPP, limit: int = 20, certificate_limit: int = 4096) -> BruteForceResult:
    """All deterministic policies that are optimal against every deterministic competitor.

    Works subtree by subtree: a policy is optimal iff at each attainable
    history its outcome is maximal among all subtree outcomes and its
    restriction to each child subtree is optimal there.  When the number of
    policies is at most ``certificate_limit`` each one is also evaluated on
    its own and paired with its first refuting history and competitor.
    """
    env, iface, rel = dpp.env, dpp.interface, dpp.relation
    att = attainable(env)
    decision = att.decision_histories()
    S = subtree_distributions(dpp, limit)
    maxima: dict = {}
    incomparable = None
    for h in att.all():
        m, bad = _maximal(rel, list(S[h]))
        maxima[h] = m
        incomparable = incomparable or bad

    opt: dict = {h: [((), Dist.point(h))] for h in att.trajectories}
    for t in reversed(range(iface.horizon)):
        for h in att.levels[t]:
            kids = [(a, p, c) for a in iface.actions for _, p, c in env.successors(h, a)]
            found = []
            for combo in itertools.product(*(opt[c] for _, _, c in kids)):
                sub = tuple(itertools.chain.from_iterable(s for s, _ in combo))
                for a in iface.actions:
                    d = mixture((p, dc) for (ka, p, _), (_, dc) in zip(kids, combo) if ka == a)
                    if d in maxima[h]:
                        found.append((((h, a),) + sub, d))
            opt[h] = found
    roots = att.levels[0]
    optimal = []
    for combo in itertools.product(*(opt[r] for r in roots)):
        assign = dict(itertools.chain.from_iterable(s for s, _ in combo))
        optimal.append({h: assign[h] for h in decision})

    n_policies = len(iface.actions) ** len(decision)
    certificate = None
    if n_policies <= certificate_limit:
        certificate = []
        for choice in itertools.product(iface.actions, repeat=len(decision)):
            assign = dict(zip(decision, choice))
            outcomes = _policy_outcomes(env, assign, att.all())
            for h in att.all():
                if outcomes[h] in maxima[h]:
                    continue
                for d2, sub in S[h].items():
                    c = rel.compare(outcomes[h], d2)
                    if c is Cmp.LESS or c is Cmp.INCOMPARABLE:
                        certificate.append({"policy": assign, "history": h, "policy_outcome": outcomes[h],
                                            "competitor": dict(sub), "competitor_outcome": d2,
                                            "compare": c})
                        break
                break
    caveat = ("deterministic policies only; an empty result rules out optimal policies when the "
              "relation is a total consistent preorder on attainable trajectories, otherwise it "
              "only means there is no deterministic optimum")
    return BruteForceResult(optimal, n_policies, decision, certificate, caveat, incomparable)


# -- verification ------------------------------------------------------------

def verify_optimal(dpp: DPP, pi: Policy, global_check: bool = False, limit: int = 20) -> OptimalityVerdict:
    """Check a policy against the local criterion and optionally all deterministic competitors.

    Local: ``D(h) >= D(h.a)`` for every attainable ``h`` and action ``a``.
    A local failure is always a genuine refutation.  A local pass proves
    optimality only when the relation is a total consistent preorder on the
    attainable trajectories; ``global_check`` compares against every
    deterministic subtree competitor instead.
    """
    env, iface, rel = dpp.env, dpp.interface, dpp.relation
    att = attainable(env)
    cache = OutcomeCache(env, pi)
    for h in att.decision_histories():
        dh = cache.of(h)
        for a in iface.actions:
            da = cache.after_action(h, a)
            c = rel.compare(dh, da)
            if c is Cmp.INCOMPARABLE:
                return OptimalityVerdict("relation-not-total", {"history": h, "action": a,
                                                                "policy_outcome": dh, "competitor_outcome": da})
            if c is Cmp.LESS:
                return OptimalityVerdict("refuted", {"history": h, "competitor": {h: a},
                                                     "policy_outcome": dh, "competitor_outcome": da})
    if not global_check:
        return OptimalityVerdict("optimal", None, "local")
    S = subtree_distributions(dpp, limit)
    for h in att.all():
        dh = cache.of(h)
        for d2, sub in S[h].items():
            c = rel.compare(dh, d2)
            if c is Cmp.INCOMPARABLE:
                return OptimalityVerdict("relation-not-total", {"history": h, "competitor": dict(sub),
                                                                "policy_outcome": dh, "competitor_outcome": d2},
                                         "global")
            if c is Cmp.LESS:
                return OptimalityVerdict("refuted", {"history": h, "competitor": dict(sub),
                                                     "policy_outcome": dh, "competitor_outcome": d2}, "global")
    return OptimalityVerdict("optimal", None, "global")


def optimal_action_sets(dpp: DPP, pi_star: Policy) -> OptimalActionSets:
    """Actions whose continuation under ``pi_star`` is a least upper bound, per attainable history."""
    verdict = verify_optimal(dpp, pi_star)
    if not verdict.optimal:
        raise ContractError(f"policy is not optimal ({verdict.verdict}); action sets would depend on it")
    env, iface, rel = dpp.env, dpp.interface, dpp.relation
    cache = OutcomeCache(env, pi_star)
    table = {}
    for h in attainable(env).decision_histories():
        cont = {a: cache.after_action(h, a) for a in iface.actions}
        table[h] = tuple(a for a in iface.actions
                         if all(rel.compare(cont[a], cont[b]).geq for b in iface.actions))
    return OptimalActionSets(table, verified=True)


def is_supported_by(pi: Policy, sets: OptimalActionSets) -> bool:
    """Whether ``pi(.|h)`` puts all its mass inside the optimal set at every listed history."""
    return all(set(pi(h).support) <= set(acts) for h, acts in sets.table.items())


# -- reward cross-checks -------------------------------------------------------

def _reward(r: Mapping | Callable) -> Callable[[History], Fraction]:
    def get(h):
        try:
            return Fraction(r[h] if isinstance(r, Mapping) else r(h))
        except KeyError:
            raise ContractError(f"reward undefined at history {history_key(h)!r}") from None
    return get


class ValueIterationResult(tuple):
    """``(values, greedy_sets)`` with the action values kept as ``.q``."""

    def __new__(cls, values, greedy_sets, q):
        obj = super().__new__(cls, (values, greedy_sets))
        obj.q = q
        return obj

    @property
    def values(self):
        return self[0]

    @property
    def greedy_sets(self):
        return self[1]


def value_iteration(dpp: DPP, r: Mapping | Callable) -> ValueIterationResult:
    """Exact finite-horizon Bellman recursion over attainable histories.

    ``V(h_T) = r(h_T)`` and ``V(h) = max_a [r(h) + sum_o rho(o|h,a) V(h.(a,o))]``.
    """
    env, iface = dpp.env, dpp.interface
    rew = _reward(r)
    att = attainable(env)
    V = {h: rew(h) for h in att.trajectories}
    Q: dict = {}
    greedy = {}
    for t in reversed(range(iface.horizon)):
        for h in att.levels[t]:
            rh = rew(h)
            q = {a: rh + sum((p * V[c] for _, p, c in env.successors(h, a)), ZERO) for a in iface.actions}
            best = max(q.values())
            V[h] = best
            Q[h] = q
            greedy[h] = tuple(a for a in iface.actions if q[a] == best)
    return ValueIterationResult(V, greedy, Q)


def policy_value(dpp: DPP, pi: Policy, r: Mapping | Callable) -> dict[History, Fraction]:
    """``V_pi(h; r)``: expected reward from ``h`` onward, on attainable histories."""
    env, iface = dpp.env, dpp.interface
    rew = _reward(r)
    att = attainable(env)
    V = {h: rew(h) for h in att.trajectories}
    for t in reversed(range(iface.horizon)):
        for h in att.levels[t]:
            V[h] = rew(h) + sum((pa * p * V[c] for a, pa in pi(h).items()
                                 for _, p, c in env.successors(h, a)), ZERO)
    return V


def bellman_violations(dpp: DPP, pi: Policy, r: Mapping | Callable) -> list[History]:
    """Attainable decision histories where ``V_pi`` fails the optimality equation."""
    env, iface = dpp.env, dpp.interface
    rew = _reward(r)
    V = policy_value(dpp, pi, r)
    bad = []
    for h in attainable(env).decision_histories():
        best = max(rew(h) + sum((p * V[c] for _, p, c in env.successors(h, a)), ZERO)
                   for a in iface.actions)
        if V[h] != best:
            bad.append(h)
    return bad


def decision_depth(h: History) -> int:
    return length(h)
