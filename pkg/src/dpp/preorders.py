"""Preference relations over distributions and checks of their axioms.

A relation is a pure comparison oracle: ``compare(A, B)`` returns a
:class:`Cmp`.  ``A <= B`` ("B is at least as desirable as A") holds when the
result is ``LESS`` or ``EQUIVALENT``.

Built-in relations can also report, for a triple ``A <= B <= C``, the finite
set of mixing coefficients at which ``alpha*A + (1-alpha)*C`` could be
equivalent to ``B``.  That is what lets :func:`check_axiom` refute
interpolation exactly; black-box relations fall back to a bounded search and
can only come out ``inconclusive``.
"""

from __future__ import annotations

import enum
import itertools
import random
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .dist import ONE, ZERO, Dist, as_fraction, mix, mixture
from .errors import ContractError, DomainError
from .model import prefix


class Cmp(enum.Enum):
    LESS = "less"
    EQUIVALENT = "equivalent"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"

    def flip(self) -> Cmp:
        return _FLIP[self]

    @property
    def leq(self) -> bool:
        return self is Cmp.LESS or self is Cmp.EQUIVALENT

    @property
    def geq(self) -> bool:
        return self is Cmp.GREATER or self is Cmp.EQUIVALENT


_FLIP = {Cmp.LESS: Cmp.GREATER, Cmp.GREATER: Cmp.LESS,
         Cmp.EQUIVALENT: Cmp.EQUIVALENT, Cmp.INCOMPARABLE: Cmp.INCOMPARABLE}


def compare_values(x, y) -> Cmp:
    if x < y:
        return Cmp.LESS
    if x > y:
        return Cmp.GREATER
    return Cmp.EQUIVALENT


def linear_interpolation_candidates(va: Fraction, vb: Fraction, vc: Fraction) -> list[Fraction]:
    """Solutions in [0, 1] of ``alpha*va + (1-alpha)*vc == vb``."""
    if va == vc:
        return [ZERO] if vb == va else []
    alpha = (vb - vc) / (va - vc)
    return [alpha] if ZERO <= alpha <= ONE else []


class _Memo:
    """Per-distribution value cache, cleared wholesale when it grows large."""

    __slots__ = ("data", "limit")

    def __init__(self, limit: int = 200_000):
        self.data: dict = {}
        self.limit = limit

    def get(self, key, compute):
        try:
            return self.data[key]
        except KeyError:
            if len(self.data) >= self.limit:
                self.data.clear()
            v = self.data[key] = compute()
            return v


class PreferenceRelation:
    """Base class for comparison oracles."""

    kind = "custom"

    def compare(self, a: Dist, b: Dist) -> Cmp:
        raise NotImplementedError

    def leq(self, a: Dist, b: Dist) -> bool:
        return self.compare(a, b).leq

    def interpolation_candidates(self, a: Dist, b: Dist, c: Dist) -> list[Fraction] | None:
        """Complete list of candidate ``alpha`` values, or ``None`` if unknown."""
        return None


class FunctionRelation(PreferenceRelation):
    """Wraps an arbitrary ``compare`` callable."""

    def __init__(self, fn: Callable[[Dist, Dist], Cmp], kind: str = "custom"):
        self._fn = fn
        self.kind = kind

    def compare(self, a, b):
        return self._fn(a, b)


class PerformanceRelation(PreferenceRelation):
    """``A <= B`` iff ``phi(A) <= phi(B)`` for an exact performance function."""

    kind = "performance"

    def __init__(self, phi: Callable[[Dist], Fraction]):
        self.phi = phi

    def compare(self, a, b):
        return compare_values(self.phi(a), self.phi(b))


class UtilityRelation(PreferenceRelation):
    """Expected-utility ordering for a utility over the ground set."""

    kind = "expected_utility"

    def __init__(self, u: Mapping | Callable):
        self.u = u
        self._values = _Memo()

    def utility(self, x) -> Fraction:
        try:
            return self.u[x] if isinstance(self.u, Mapping) else self.u(x)
        except KeyError:
            raise ContractError(f"utility undefined at {x!r}") from None

    def value(self, d: Dist) -> Fraction:
        return self._values.get(d, lambda: d.expect(self.utility))

    def compare(self, a, b):
        return compare_values(self.value(a), self.value(b))

    def interpolation_candidates(self, a, b, c):
        return linear_interpolation_candidates(self.value(a), self.value(b), self.value(c))


class ExpectedRewardRelation(UtilityRelation):
    """Ordering by expected cumulative history reward ``sum_t r(H_t)``."""

    kind = "expected_reward"

    def __init__(self, r: Mapping | Callable, horizon: int):
        self.r = r
        self.horizon = horizon
        self._cache: dict = {}
        super().__init__(self.trajectory_utility)

    def reward(self, h) -> Fraction:
        try:
            return self.r[h] if isinstance(self.r, Mapping) else self.r(h)
        except KeyError:
            raise ContractError(f"reward undefined at history {'|'.join(h)!r}") from None

    def trajectory_utility(self, w) -> Fraction:
        """``u_r(w)``: the reward summed over every prefix of ``w``."""
        v = self._cache.get(w)
        if v is None:
            v = sum((as_fraction(self.reward(prefix(w, t))) for t in range(self.horizon + 1)), ZERO)
            self._cache[w] = v
        return v


def _exp_vs(p: Fraction, q: Fraction) -> Cmp:
    """Exact sign of ``exp(p) - q`` for rational ``p != 0``; ``exp(p)`` is irrational there."""
    prec = 64
    while True:
        with mpmath.workprec(prec):
            diff = mpmath.exp(mpmath.mpf(p.numerator) / p.denominator) - mpmath.mpf(q.numerator) / q.denominator
            if abs(diff) > mpmath.ldexp(1, -prec // 2) * max(1, abs(q)):
                return Cmp.GREATER if diff > 0 else Cmp.LESS
        prec *= 2


class RiskRelation(PreferenceRelation):
    """Risk-averse ordering with an event of unacceptable risk.

    Performance is expected utility when the event has probability zero and
    ``beta * exp(P(E))`` otherwise.  For ``beta <= 0`` this reduces to an
    exact rule: risk-free distributions sit above every risky one, and risky
    ones are ranked by event probability, smaller being better.  For
    ``beta > 0`` the exponential is compared against rationals with
    certified multiprecision evaluation.
    """

    kind = "risk"

    def __init__(self, u: Mapping, beta, event: Iterable, omega: Iterable):
        omega = tuple(omega)
        self.u = {w: as_fraction(u[w]) for w in omega} if omega else {}
        self.beta = as_fraction(beta)
        self.event = frozenset(event)
        self.omega = omega
        if not self.event or not self.event < set(omega):
            raise ContractError("risk event must be a proper non-empty subset of the trajectory set")
        if not self.beta < min(self.u.values()):
            raise ContractError("beta must lie strictly below the utility on every trajectory")
        safe = {self.u[w] for w in omega if w not in self.event}
        if len(safe) < 2:
            raise ContractError("utility must be non-constant outside the risk event")

        self._risk = _Memo()
        self._safe = _Memo()

    def risk(self, d: Dist) -> Fraction:
        return self._risk.get(d, lambda: d.prob_of(self.event))

    def safe_value(self, d: Dist) -> Fraction:
        try:
            return self._safe.get(d, lambda: d.expect(self.u))
        except KeyError as exc:
            raise ContractError(f"utility undefined at {exc.args[0]!r}") from None

    def _safe_vs_risky(self, v: Fraction, p: Fraction) -> Cmp:
        # v > beta always, and beta * exp(p) <= beta when beta <= 0
        if self.beta <= 0:
            return Cmp.GREATER
        return _exp_vs(p, v / self.beta).flip()

    def compare(self, a, b):
        ra, rb = self.risk(a), self.risk(b)
        if not ra and not rb:
            return compare_values(self.safe_value(a), self.safe_value(b))
        if not ra:
            return self._safe_vs_risky(self.safe_value(a), rb)
        if not rb:
            return self._safe_vs_risky(self.safe_value(b), ra).flip()
        if self.beta < 0:
            return compare_values(rb, ra)
        if self.beta == 0:
            return Cmp.EQUIVALENT
        return compare_values(ra, rb)

    def interpolation_candidates(self, a, b, c):
        if self.beta >= 0:
            return None
        ra, rb, rc = self.risk(a), self.risk(b), self.risk(c)
        if rb:
            return linear_interpolation_candidates(ra, rb, rc)
        if not ra and not rc:
            return linear_interpolation_candidates(self.safe_value(a), self.safe_value(b),
                                                   self.safe_value(c))
        if not ra:
            return [ONE]
        if not rc:
            return [ZERO]
        return []


class LexicographicRelation(PreferenceRelation):
    """Expected ``u1`` decides; exact ties are broken by expected ``u2``."""

    kind = "lexicographic"

    def __init__(self, u1: Mapping | Callable, u2: Mapping | Callable):
        self.first = UtilityRelation(u1)
        self.second = UtilityRelation(u2)
        self.u1, self.u2 = u1, u2

    def compare(self, a, b):
        c = self.first.compare(a, b)
        return c if c is not Cmp.EQUIVALENT else self.second.compare(a, b)

    def interpolation_candidates(self, a, b, c):
        v1 = self.first.value
        if v1(a) != v1(c):
            return linear_interpolation_candidates(v1(a), v1(b), v1(c))
        if v1(b) != v1(a):
            return []
        return self.second.interpolation_candidates(a, b, c)


def expected_utility_relation(u: Mapping | Callable) -> UtilityRelation:
    return UtilityRelation(u)


def expected_reward_relation(r: Mapping | Callable, horizon: int) -> ExpectedRewardRelation:
    return ExpectedRewardRelation(r, horizon)


def risk_relation(u: Mapping, beta, event: Iterable, omega: Iterable) -> RiskRelation:
    return RiskRelation(u, beta, event, omega)


def lexicographic_relation(u1, u2) -> LexicographicRelation:
    return LexicographicRelation(u1, u2)


# -- interpolation search ----------------------------------------------------

def _stern_brocot(probe: Callable[[Fraction], Cmp], budget: int) -> Fraction | None:
    """Exact search for a rational root of a monotone sign oracle.

    ``probe(alpha)`` reports how ``alpha*A + (1-alpha)*C`` compares with the
    target: ``GREATER`` means alpha is too small.  Walks the Stern-Brocot
    tree between 0/1 and 1/1, galloping along runs of equal turns, so a root
    with denominator ``q`` costs ``O(log(q)^2)`` probes.
    """
    calls = 0
    lo, hi = (0, 1), (1, 1)

    def ask(n, d):
        nonlocal calls
        calls += 1
        return probe(Fraction(n, d))

    while calls < budget:
        r = ask(lo[0] + hi[0], lo[1] + hi[1])
        if r is Cmp.EQUIVALENT:
            return Fraction(lo[0] + hi[0], lo[1] + hi[1])
        if r is Cmp.INCOMPARABLE:
            return None
        moving, fixed = (lo, hi) if r is Cmp.GREATER else (hi, lo)
        want = r
        good, bad = 1, None
        k = 2
        while bad is None and calls < budget:
            rk = ask(moving[0] + k * fixed[0], moving[1] + k * fixed[1])
            if rk is Cmp.EQUIVALENT:
                return Fraction(moving[0] + k * fixed[0], moving[1] + k * fixed[1])
            if rk is want:
                good, k = k, 2 * k
            elif rk is Cmp.INCOMPARABLE:
                return None
            else:
                bad = k
        if bad is None:
            return None
        while bad - good > 1 and calls < budget:
            m = (good + bad) // 2
            rm = ask(moving[0] + m * fixed[0], moving[1] + m * fixed[1])
            if rm is Cmp.EQUIVALENT:
                return Fraction(moving[0] + m * fixed[0], moving[1] + m * fixed[1])
            if rm is want:
                good = m
            elif rm is Cmp.INCOMPARABLE:
                return None
            else:
                bad = m
        new_moving = (moving[0] + good * fixed[0], moving[1] + good * fixed[1])
        new_fixed = (moving[0] + (good + 1) * fixed[0], moving[1] + (good + 1) * fixed[1])
        if r is Cmp.GREATER:
            lo, hi = new_moving, new_fixed
        else:
            lo, hi = new_fixed, new_moving
    return None


def find_interpolation(rel: PreferenceRelation, a: Dist, b: Dist, c: Dist,
                       grid: Sequence[Fraction] = (), budget: int = 64) -> tuple[Fraction | None, bool]:
    """Look for ``alpha`` in [0, 1] with ``alpha*a + (1-alpha)*c ~ b``.

    Returns ``(alpha, exact)``.  ``exact`` is True when the relation supplied
    a complete candidate list, so ``alpha is None`` is then a proof that no
    such coefficient exists.
    """
    cands = rel.interpolation_candidates(a, b, c)
    if cands is not None:
        for alpha in cands:
            if rel.compare(mix(alpha, a, c), b) is Cmp.EQUIVALENT:
                return alpha, True
        return None, True
    for alpha in (ZERO, ONE, *grid):
        if rel.compare(mix(alpha, a, c), b) is Cmp.EQUIVALENT:
            return Fraction(alpha), False
    found = _stern_brocot(lambda al: rel.compare(mix(al, a, c), b), budget)
    return found, False


# -- testsets ----------------------------------------------------------------

DEFAULT_ALPHAS = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


@dataclass(frozen=True)
class TestsetSpec:
    """How to generate distributions for axiom checks.

    Diracs on every trajectory, pairwise Dirac mixtures at each ``alphas``
    value (at most ``max_pairs`` pairs) and ``count`` seeded random rational
    distributions.  ``tuple_budget`` caps the number of tuples a single
    axiom check evaluates; beyond it tuples are sampled with ``seed``.
    """

    __test__ = False

    seed: int = 0
    count: int = 10
    alphas: tuple = DEFAULT_ALPHAS
    max_denominator: int = 6
    max_pairs: int = 400
    tuple_budget: int = 40_000


@dataclass(frozen=True)
class Testset:
    __test__ = False

    dists: tuple[Dist, ...]
    n_dirac: int
    spec: TestsetSpec

    def __len__(self):
        return len(self.dists)


def random_rational_dist(elements: Sequence, rng: random.Random, max_denominator: int = 6,
                         max_support: int = 4) -> Dist:
    k = rng.randint(min(2, len(elements)), min(max_support, len(elements)))
    chosen = rng.sample(list(elements), k)
    weights = [rng.randint(1, max_denominator) for _ in chosen]
    total = sum(weights)
    return Dist({x: Fraction(w, total) for x, w in zip(chosen, weights)})


def build_testset(omega: Iterable, spec: TestsetSpec = TestsetSpec()) -> Testset:
    omega = list(omega)
    rng = random.Random(spec.seed)
    diracs = [Dist.point(w) for w in omega]
    pairs = list(itertools.combinations(range(len(omega)), 2))
    if len(pairs) > spec.max_pairs:
        pairs = sorted(rng.sample(pairs, spec.max_pairs))
    out = list(diracs)
    out.extend(mix(al, diracs[i], diracs[j]) for i, j in pairs for al in spec.alphas)
    if len(omega) >= 2:
        out.extend(random_rational_dist(omega, rng, spec.max_denominator)
                   for _ in range(spec.count))
    return Testset(tuple(dict.fromkeys(out)), len(diracs), spec)


# -- axiom reports -------------------------------------------------------------

AXIOMS = ("totality", "transitivity", "consistency", "convexity", "interpolation")


@dataclass(frozen=True)
class AxiomWitness:
    """A concrete tuple on which an axiom fails."""

    axiom: str
    dists: tuple[Dist, ...]
    alpha: Fraction | None = None
    observed: dict = field(default_factory=dict)

    def recheck(self, rel: PreferenceRelation) -> bool:
        """Re-evaluate against ``rel``; True iff the tuple still violates the axiom."""
        ax = self.axiom
        if ax == "totality":
            a, b = self.dists
            return rel.compare(a, b) is Cmp.INCOMPARABLE
        if ax == "transitivity":
            a, b, c = self.dists
            return rel.leq(a, b) and rel.leq(b, c) and not rel.leq(a, c)
        if ax in ("consistency", "convexity", "mixture-monotonicity"):
            if ax == "mixture-monotonicity" and self.alpha is None:
                a, b = self.dists[:2]
                return not rel.leq(a, b)
            a, b, c = self.dists
            lhs = rel.leq(a, b)
            rhs = rel.leq(mix(self.alpha, a, c), mix(self.alpha, b, c))
            if ax == "convexity":
                return lhs != rhs
            return lhs and not rhs
        if ax == "interpolation":
            a, b, c = self.dists
            if not (rel.leq(a, b) and rel.leq(b, c)):
                return False
            alpha, exact = find_interpolation(rel, a, b, c)
            return alpha is None and exact
        raise DomainError(f"unknown axiom {ax!r}")


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    verdict: str  # "passed-on-testset" | "refuted" | "inconclusive"
    witness: AxiomWitness | None
    testset_size: int
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "passed-on-testset"

    @property
    def refuted(self) -> bool:
        return self.verdict == "refuted"


class _Table:
    """Pairwise comparison and mixture caches over an indexed testset."""

    def __init__(self, rel, dists):
        self.rel = rel
        self.d = dists
        self._cmp: dict = {}
        self._mix: dict = {}

    def cmp(self, i, j) -> Cmp:
        key = (i, j)
        r = self._cmp.get(key)
        if r is None:
            r = self.rel.compare(self.d[i], self.d[j]) if i != j else self.rel.compare(self.d[i], self.d[i])
            self._cmp[key] = r
            self._cmp.setdefault((j, i), r.flip())
        return r

    def mixed(self, alpha, i, k) -> Dist:
        key = (alpha, i, k)
        m = self._mix.get(key)
        if m is None:
            m = mix(alpha, self.d[i], self.d[k])
            self._mix[key] = m
        return m


def _tuples(n: int, arity: int, n_dirac: int, budget: int, rng: random.Random):
    if n ** arity <= budget:
        yield from itertools.product(range(n), repeat=arity)
        return
    remaining = budget
    if n_dirac ** arity <= budget // 2:
        yield from itertools.product(range(n_dirac), repeat=arity)
        remaining -= n_dirac ** arity
    for _ in range(remaining):
        yield tuple(rng.randrange(n) for _ in range(arity))


def check_axiom(rel: PreferenceRelation, axiom: str, testset: Testset,
                alphas: Sequence[Fraction] | None = None, search_budget: int = 48) -> AxiomReport:
    """Evaluate one axiom over every (or a seeded sample of) testset tuple.

    Refutations carry the first violating tuple in enumeration order.
    """
    if axiom not in AXIOMS:
        raise DomainError(f"unknown axiom {axiom!r}; expected one of {AXIOMS}")
    alphas = tuple(as_fraction(a) for a in (alphas if alphas is not None else testset.spec.alphas))
    dists = testset.dists
    n = len(dists)
    tab = _Table(rel, dists)
    rng = random.Random(testset.spec.seed + AXIOMS.index(axiom) + 1)
    budget = testset.spec.tuple_budget
    checked = 0

    def refuted(idx, alpha=None, **obs):
        w = AxiomWitness(axiom, tuple(dists[i] for i in idx), alpha, obs)
        return AxiomReport(axiom, "refuted", w, checked)

    if axiom == "totality":
        for i, j in itertools.combinations_with_replacement(range(n), 2):
            checked += 1
            if tab.cmp(i, j) is Cmp.INCOMPARABLE:
                return refuted((i, j), compare=Cmp.INCOMPARABLE)
        return AxiomReport(axiom, "passed-on-testset", None, checked)

    if axiom == "transitivity":
        for i, j, k in _tuples(n, 3, testset.n_dirac, budget, rng):
            if tab.cmp(i, j).leq and tab.cmp(j, k).leq:
                checked += 1
                if not tab.cmp(i, k).leq:
                    return refuted((i, j, k), ab=tab.cmp(i, j), bc=tab.cmp(j, k), ac=tab.cmp(i, k))
        return AxiomReport(axiom, "passed-on-testset", None, checked)

    if axiom in ("consistency", "convexity"):
        per_alpha = max(1, budget // max(1, len(alphas)))
        for i, j, k in _tuples(n, 3, testset.n_dirac, per_alpha, rng):
            base = tab.cmp(i, j).leq
            if axiom == "consistency" and not base:
                continue
            for al in alphas:
                checked += 1
                mixed = rel.leq(tab.mixed(al, i, k), tab.mixed(al, j, k))
                if (axiom == "consistency" and not mixed) or (axiom == "convexity" and mixed != base):
                    return refuted((i, j, k), al, unmixed=tab.cmp(i, j),
                                   mixed=rel.compare(tab.mixed(al, i, k), tab.mixed(al, j, k)))
        return AxiomReport(axiom, "passed-on-testset", None, checked)

    # interpolation
    grid = tuple(sorted(set(alphas)))
    first_unresolved = None
    for i, j, k in _tuples(n, 3, testset.n_dirac, budget, rng):
        if not (tab.cmp(i, j).leq and tab.cmp(j, k).leq):
            continue
        checked += 1
        alpha, exact = find_interpolation(rel, dists[i], dists[j], dists[k], grid, search_budget)
        if alpha is None:
            if exact:
                return refuted((i, j, k))
            if first_unresolved is None:
                first_unresolved = (i, j, k)
    if first_unresolved is not None:
        w = AxiomWitness(axiom, tuple(dists[i] for i in first_unresolved))
        return AxiomReport(axiom, "inconclusive", w, checked,
                           note="no equivalent mixture found by bounded search; black-box relation")
    return AxiomReport(axiom, "passed-on-testset", None, checked)


def coherence_violations(rel: PreferenceRelation, dists: Sequence[Dist]) -> list[tuple]:
    """Pairs where ``compare(A, B)`` and ``compare(B, A)`` are not mutually inverse, or ``compare(A, A)`` is not EQUIVALENT."""
    bad = []
    for i, a in enumerate(dists):
        if rel.compare(a, a) is not Cmp.EQUIVALENT:
            bad.append((a, a))
        for b in dists[i + 1:]:
            if rel.compare(a, b) is not rel.compare(b, a).flip():
                bad.append((a, b))
    return bad


# -- mixture monotonicity ------------------------------------------------------

def mixture_monotonicity_check(rel: PreferenceRelation, alphas: Sequence, As: Sequence[Dist],
                               Bs: Sequence[Dist], stepwise: bool = False) -> AxiomReport:
    """Check ``sum a_i A_i <= sum a_i B_i`` given ``A_i <= B_i`` for every i.

    With ``stepwise=True`` every link of the chain that swaps one ``A_i`` for
    ``B_i`` at a time is checked as well; a broken link is reported as the
    consistency instance it is.
    """
    alphas = [as_fraction(a) for a in alphas]
    if not (len(alphas) == len(As) == len(Bs)) or not alphas:
        raise DomainError("weights and distribution lists must be non-empty and of equal length")
    if any(a < 0 for a in alphas) or sum(alphas, ZERO) != ONE:
        raise DomainError("mixture weights must be nonnegative and sum to exactly 1")
    ax = "mixture-monotonicity"
    for a, b in zip(As, Bs):
        if not rel.leq(a, b):
            return AxiomReport(ax, "passed-on-testset", None, 0, note="hypothesis A_i <= B_i not met")
    n = len(alphas)
    chain = [mixture(zip(alphas, list(Bs[:k]) + list(As[k:]))) for k in range(n + 1)]
    if stepwise:
        for k in range(n):
            if not rel.leq(chain[k], chain[k + 1]):
                w = alphas[k]
                if w == ONE:
                    wit = AxiomWitness(ax, (As[k], Bs[k]))
                else:
                    rest = mixture((alphas[i] / (ONE - w), Bs[i] if i < k else As[i])
                                   for i in range(n) if i != k)
                    wit = AxiomWitness(ax, (As[k], Bs[k], rest), w, {"step": k})
                return AxiomReport(ax, "refuted", wit, k + 1)
    if not rel.leq(chain[0], chain[-1]):
        wit = AxiomWitness(ax, (chain[0], chain[-1]), None, {"n": n})
        return AxiomReport(ax, "refuted", wit, 1)
    return AxiomReport(ax, "passed-on-testset", None, 1)


def monotone_tuples(rel: PreferenceRelation, dists: Sequence[Dist], count: int, seed: int = 0,
                    n_max: int = 4, max_denominator: int = 8):
    """Seeded ``(alphas, As, Bs)`` with each pair oriented so ``A_i <= B_i``."""
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(1, n_max)
        raw = [rng.randint(0, max_denominator) for _ in range(n)]
        if not any(raw):
            raw[0] = 1
        total = sum(raw)
        alphas = [Fraction(x, total) for x in raw]
        As, Bs = [], []
        for _ in range(n):
            a, b = rng.choice(dists), rng.choice(dists)
            if not rel.leq(a, b):
                a, b = b, a
            As.append(a)
            Bs.append(b)
        yield alphas, As, Bs
