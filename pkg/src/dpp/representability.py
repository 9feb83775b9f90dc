"""Deciding, on finite testsets, whether a relation is an expected-utility order.

The fitting is exact and constructive.  Every Dirac is compared with every
other; a strict comparison cycle makes any utility impossible.  Otherwise
each tested distribution is calibrated against the worst and best ones:
under a linear representation ``D ~ alpha*worst + (1-alpha)*best`` forces
``value(D) = 1 - alpha`` after normalizing to ``[0, 1]``, so the calibrated
values are the only candidates and the verification pass is decisive on the
testset.
"""

from __future__ import annotations

import itertools
import random
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .dist import ONE, ZERO, Dist, mix
from .errors import RelationNotTotalError
from .features import FeatureMap, GammaWeights, frequency
from .preorders import Cmp, PreferenceRelation, TestsetSpec, build_testset, compare_values, find_interpolation

CALIBRATION_BUDGET = 400


@dataclass
class UtilityFit:
    verdict: str  # "representable" | "refuted-on-testset" | "infeasible"
    utility: dict | None = None
    margin: Fraction | None = None
    witness: dict | None = None
    testset_size: int = 0
    note: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def representable(self) -> bool:
        return self.verdict == "representable"


# -- shared helpers ------------------------------------------------------------

def _cmp(rel: PreferenceRelation, a: Dist, b: Dist) -> Cmp:
    c = rel.compare(a, b)
    if c is Cmp.INCOMPARABLE:
        raise RelationNotTotalError((a, b), "incomparable")
    return c


def _extremes(rel: PreferenceRelation, dists: Sequence[Dist]) -> tuple[int, int]:
    lo = hi = 0
    for i in range(1, len(dists)):
        if _cmp(rel, dists[i], dists[lo]) is Cmp.LESS:
            lo = i
        if _cmp(rel, dists[i], dists[hi]) is Cmp.GREATER:
            hi = i
    return lo, hi


def _pairs(values: Sequence[Fraction], budget: int, seed: int) -> Iterable[tuple[int, int]]:
    """Every pair when affordable; otherwise neighbours in value order plus a seeded sample."""
    n = len(values)
    if n * (n - 1) // 2 <= budget:
        yield from itertools.combinations(range(n), 2)
        return
    order = sorted(range(n), key=values.__getitem__)
    yield from zip(order, order[1:])
    rng = random.Random(seed)
    for _ in range(max(0, budget - n)):
        i, j = rng.randrange(n), rng.randrange(n - 1)
        yield (i, j + (j >= i))


def _first_mismatch(rel, dists, values, budget, seed):
    for i, j in _pairs(values, budget, seed):
        want = _cmp(rel, dists[i], dists[j])
        got = compare_values(values[i], values[j])
        if want is not got:
            return {"kind": "mismatch", "dists": (dists[i], dists[j]), "relation": want, "linear": got}
    return None


def _calibrate(rel, worst: Dist, d: Dist, best: Dist) -> tuple[Fraction | None, bool]:
    alpha, exact = find_interpolation(rel, worst, d, best, budget=CALIBRATION_BUDGET)
    return (None if alpha is None else ONE - alpha), exact


def _dirac_cycle(rel: PreferenceRelation, omega: Sequence) -> tuple[nx.DiGraph, list | None]:
    """Weak-preference graph on Diracs and, if one exists, a cycle through a strict edge."""
    n = len(omega)
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    diracs = [Dist.point(w) for w in omega]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            c = _cmp(rel, diracs[i], diracs[j])
            if c.leq:
                g.add_edge(i, j, strict=c is Cmp.LESS)
    comp = {}
    for k, scc in enumerate(nx.strongly_connected_components(g)):
        for v in scc:
            comp[v] = k
    for i, j, data in g.edges(data=True):
        if data["strict"] and comp[i] == comp[j]:
            back = nx.shortest_path(g.subgraph([v for v in g if comp[v] == comp[i]]), j, i)
            path = [i] + back
            chain = [(omega[a], "<" if g.edges[a, b]["strict"] else "<=", omega[b])
                     for a, b in zip(path, path[1:])]
            return g, chain
    return g, None


# -- trajectory utilities ------------------------------------------------------

def fit_utility(rel: PreferenceRelation, omega: Iterable, spec: TestsetSpec = TestsetSpec(),
                pair_budget: int = 40_000) -> UtilityFit:
    """Fit ``u`` on trajectories so that expected ``u`` reproduces ``rel`` on a testset.

    Verdicts: ``infeasible`` when Dirac comparisons contain a strict cycle,
    ``refuted-on-testset`` when some tested pair disagrees with every
    admissible utility, ``representable`` when the returned utility matches
    the relation on all verified pairs.
    """
    omega = list(omega)
    _, cycle = _dirac_cycle(rel, omega)
    if cycle is not None:
        return UtilityFit("infeasible", witness={"kind": "cycle", "chain": cycle})
    ts = build_testset(omega, spec)
    dists = list(ts.dists)
    diracs = dists[: len(omega)]
    lo, hi = _extremes(rel, diracs)
    worst, best = diracs[lo], diracs[hi]

    if _cmp(rel, worst, best) is Cmp.EQUIVALENT:
        u = {w: ZERO for w in omega}
        values = [ZERO] * len(dists)
        bad = _first_mismatch(rel, dists, values, pair_budget, spec.seed)
        if bad:
            return UtilityFit("refuted-on-testset", u, ZERO, bad, len(dists))
        return UtilityFit("representable", u, ZERO, None, len(dists), "relation is indifferent on the testset")

    u: dict = {}
    failure = None
    for w, d in zip(omega, diracs):
        val, exact = _calibrate(rel, worst, d, best)
        if val is None:
            failure = failure or {"kind": "interpolation", "dists": (worst, d, best), "exact": exact}
            break
        u[w] = val
    calibrated = failure is None
    if not calibrated:
        u = _rank_utility(rel, omega, diracs)
    levels = sorted(set(u.values()))
    margin = min((b - a for a, b in zip(levels, levels[1:])), default=ZERO)

    values = [d.expect(u) for d in dists]
    bad = None if calibrated else _mixture_mismatch(rel, diracs, u, spec.alphas)
    bad = bad or _first_mismatch(rel, dists, values, pair_budget, spec.seed)
    if bad is not None:
        return UtilityFit("refuted-on-testset", u, margin, bad, len(dists),
                          extras={"calibration_failure": failure})
    if not calibrated:
        # no exact mismatch found, but no utility can satisfy the calibration either
        return UtilityFit("refuted-on-testset", u, margin, failure, len(dists),
                          note="Dirac is not equivalent to any mixture of the extremes")
    return UtilityFit("representable", u, margin, None, len(dists))


def _rank_utility(rel, omega, diracs) -> dict:
    """Equally spaced levels by Dirac rank: the widest-margin utility for the Dirac order alone."""
    order = sorted(range(len(omega)), key=lambda i: sum(_cmp(rel, diracs[i], d).geq for d in diracs))
    ranks: dict = {}
    level = -1
    prev = None
    for i in order:
        if prev is None or _cmp(rel, diracs[i], diracs[prev]) is not Cmp.EQUIVALENT:
            level += 1
        ranks[i] = level
        prev = i
    top = max(level, 1)
    return {omega[i]: Fraction(ranks[i], top) for i in range(len(omega))}


def _mixture_mismatch(rel, diracs, u, alphas):
    """First ``(A, B, C, alpha)`` over Diracs where mixing with ``C`` breaks agreement with ``u``."""
    vals = [d.expect(u) for d in diracs]
    n = len(diracs)
    for i, j in itertools.permutations(range(n), 2):
        if vals[i] >= vals[j]:
            continue
        for k in range(n):
            if k in (i, j):
                continue
            for al in alphas:
                a, b = mix(al, diracs[i], diracs[k]), mix(al, diracs[j], diracs[k])
                got = _cmp(rel, a, b)
                if got is not Cmp.LESS:
                    return {"kind": "convexity", "dists": (diracs[i], diracs[j], diracs[k]), "alpha": al,
                            "unmixed": _cmp(rel, diracs[i], diracs[j]), "mixed": got, "pair": (a, b)}
    return None


# -- feature-action rewards ----------------------------------------------------

def _qq(x: Fraction):
    return QQ(x.numerator, x.denominator)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def solve_exact(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction] | None:
    """One exact solution of ``rows @ x = rhs`` (free variables zero), or ``None`` if inconsistent."""
    n = len(rows)
    k = len(rows[0]) if rows else 0
    if n == 0:
        return [ZERO] * k
    M = DomainMatrix([[_qq(v) for v in row] + [_qq(b)] for row, b in zip(rows, rhs)], (n, k + 1), QQ)
    R, pivots = M.rref()
    if k in pivots:
        return None
    R = R.to_list()
    x = [ZERO] * k
    for r, c in enumerate(pivots):
        x[c] = _frac(R[r][k])
    return x


def fit_feature_reward(rel: PreferenceRelation, phi: FeatureMap, gamma: GammaWeights, omega: Iterable,
                       actions: Sequence[str], spec: TestsetSpec = TestsetSpec(),
                       pair_budget: int = 40_000) -> UtilityFit:
    """Fit ``r(x, a)`` with ``A <= B`` iff ``E_A[sum_t gamma_t r] <= E_B[sum_t gamma_t r]`` on a testset.

    Tested distributions are calibrated between the worst and best ones,
    then the linear system ``frequency(D) . r = value(D)`` is solved
    exactly.  An inconsistent system is reported with the dependent
    distribution and the combination of earlier ones that contradicts it.
    """
    omega = list(omega)
    T = len(gamma)
    ts = build_testset(omega, spec)
    dists = list(ts.dists)
    keys = [(x, a) for x in phi.features for a in actions]
    lo, hi = _extremes(rel, dists)
    worst, best = dists[lo], dists[hi]
    freqs = [frequency(phi, gamma, 0, T, d) for d in dists]
    rows = [[f.prob(k) for k in keys] for f in freqs]

    if _cmp(rel, worst, best) is Cmp.EQUIVALENT:
        values = [ZERO] * len(dists)
    else:
        values = []
        for d in dists:
            v, exact = _calibrate(rel, worst, d, best)
            if v is None:
                return UtilityFit("refuted-on-testset", None, None,
                                  {"kind": "interpolation", "dists": (worst, d, best), "exact": exact},
                                  len(dists))
            values.append(v)

    sol = solve_exact(rows, values)
    if sol is None:
        return UtilityFit("refuted-on-testset", None, None, _inconsistency(rows, values, dists), len(dists))
    r = dict(zip(keys, sol))
    got = [f.expect(lambda k: r.get(k, ZERO)) for f in freqs]
    bad = _first_mismatch(rel, dists, got, pair_budget, spec.seed)
    levels = sorted(set(got))
    margin = min((b - a for a, b in zip(levels, levels[1:])), default=ZERO)
    if bad is not None:
        return UtilityFit("refuted-on-testset", r, margin, bad, len(dists))
    return UtilityFit("representable", r, margin, None, len(dists), extras={"values": dict(zip(dists, got))})


def _inconsistency(rows, values, dists) -> dict:
    """Smallest prefix that is inconsistent, with the linear dependency that breaks it."""
    lo, hi = 1, len(rows)
    while lo < hi:
        mid = (lo + hi) // 2
        if solve_exact(rows[:mid], values[:mid]) is None:
            hi = mid
        else:
            lo = mid + 1
    k = lo - 1
    earlier = rows[:k]
    transposed = [list(col) for col in zip(*earlier)] if earlier else []
    coeffs = solve_exact(transposed, rows[k]) if earlier else None
    combo = {}
    if coeffs is not None:
        combo = {i: c for i, c in enumerate(coeffs) if c}
    return {"kind": "linear-dependency", "dist": dists[k], "value": values[k],
            "combination": [(dists[i], c, values[i]) for i, c in combo.items()]}


# -- affine uniqueness -------------------------------------------------------

@dataclass(frozen=True)
class AffineResult:
    equivalent: bool
    scale: Fraction | None = None
    shift: Fraction | None = None
    witness: tuple | None = None


def affine_equivalence(u1: Mapping[Hashable, Fraction], u2: Mapping[Hashable, Fraction]) -> AffineResult:
    """Find ``scale > 0`` and ``shift`` with ``u2 = scale * u1 + shift`` on the common domain."""
    if set(u1) != set(u2):
        diff = next(iter(set(u1) ^ set(u2)))
        return AffineResult(False, witness=(diff,))
    keys = list(u1)
    if not keys:
        return AffineResult(True, ONE, ZERO)
    lo = min(keys, key=lambda k: u1[k])
    hi = max(keys, key=lambda k: u1[k])
    if u1[lo] == u1[hi]:
        const2 = all(u2[k] == u2[keys[0]] for k in keys)
        if const2:
            return AffineResult(True, ONE, u2[keys[0]] - u1[keys[0]])
        other = next(k for k in keys if u2[k] != u2[keys[0]])
        return AffineResult(False, witness=(keys[0], other))
    scale = Fraction(u2[hi] - u2[lo]) / (u1[hi] - u1[lo])
    if scale <= 0:
        return AffineResult(False, witness=(lo, hi))
    shift = u2[lo] - scale * u1[lo]
    for k in keys:
        if u2[k] != scale * u1[k] + shift:
            for a, b in ((lo, k), (k, hi)):
                if compare_values(u1[a], u1[b]) is not compare_values(u2[a], u2[b]):
                    return AffineResult(False, witness=(a, b))
            return AffineResult(False, witness=(lo, k, hi))
    return AffineResult(True, scale, shift)


def induced_order_agrees(rel: PreferenceRelation, u: Mapping, dists: Sequence[Dist]) -> bool:
    """Whether expected ``u`` orders every pair of ``dists`` as ``rel`` does."""
    vals = [d.expect(u) for d in dists]
    return all(rel.compare(dists[i], dists[j]) is compare_values(vals[i], vals[j])
               for i, j in itertools.combinations(range(len(dists)), 2))
