"""Exact finite probability distributions.

Masses are :class:`fractions.Fraction` values, total mass is exactly one and
zero-mass elements never appear in the support, so two distributions are
equal precisely when they assign the same mass to every element.
"""

from __future__ import annotations

from collections.abc import Callable, Hashable, Iterable, Iterator, Mapping
from fractions import Fraction
from numbers import Rational
from typing import Generic, TypeVar

from .errors import DomainError

X = TypeVar("X", bound=Hashable)
Y = TypeVar("Y", bound=Hashable)

ONE = Fraction(1)
ZERO = Fraction(0)


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction.

    Floats are rejected: every probability in this package is exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"not a rational number: {value!r}")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise DomainError(f"not a rational number: {value!r}") from exc
    raise DomainError(f"not an exact rational: {value!r} ({type(value).__name__})")


class Dist(Mapping, Generic[X]):
    """An exact probability distribution over hashable elements."""

    __slots__ = ("_mass", "_hash")

    def __init__(self, mass: Mapping | Iterable[tuple] = (), *, _checked: bool = False):
        if _checked:
            self._mass = mass
        else:
            items = mass.items() if isinstance(mass, Mapping) else mass
            clean: dict = {}
            for x, p in items:
                p = as_fraction(p)
                if p < 0:
                    raise DomainError(f"negative mass {p} on {x!r}")
                if p:
                    clean[x] = clean.get(x, ZERO) + p
            total = sum(clean.values(), ZERO)
            if total != ONE:
                raise DomainError(f"masses sum to {total}, not 1")
            self._mass = clean
        self._hash = None

    @classmethod
    def point(cls, x: X) -> Dist[X]:
        """The Dirac distribution at ``x``."""
        return cls({x: ONE}, _checked=True)

    @classmethod
    def uniform(cls, xs: Iterable[X]) -> Dist[X]:
        xs = list(dict.fromkeys(xs))
        if not xs:
            raise DomainError("uniform distribution over an empty set")
        p = Fraction(1, len(xs))
        return cls({x: p for x in xs}, _checked=True)

    def __getitem__(self, x: X) -> Fraction:
        return self._mass[x]

    def __iter__(self) -> Iterator[X]:
        return iter(self._mass)

    def __len__(self) -> int:
        return len(self._mass)

    def __eq__(self, other) -> bool:
        if isinstance(other, Dist):
            return self._mass == other._mass
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._mass.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{x!r}: {p}" for x, p in self._mass.items())
        return f"Dist({{{body}}})"

    @property
    def support(self) -> tuple:
        return tuple(self._mass)

    def prob(self, x: X) -> Fraction:
        return self._mass.get(x, ZERO)

    def prob_of(self, event: Callable[[X], bool] | Iterable[X]) -> Fraction:
        """Mass of an event given as a predicate or a collection of elements."""
        if callable(event):
            return sum((p for x, p in self._mass.items() if event(x)), ZERO)
        event = event if isinstance(event, (set, frozenset)) else set(event)
        return sum((p for x, p in self._mass.items() if x in event), ZERO)

    def expect(self, f: Callable[[X], Fraction] | Mapping) -> Fraction:
        """Exact expectation of ``f`` (a callable or a mapping) under this distribution."""
        get = f.__getitem__ if isinstance(f, Mapping) else f
        return sum((p * get(x) for x, p in self._mass.items()), ZERO)

    def pushforward(self, f: Callable[[X], Y]) -> Dist[Y]:
        out: dict = {}
        for x, p in self._mass.items():
            y = f(x)
            out[y] = out.get(y, ZERO) + p
        return Dist(out, _checked=True)

    def is_point(self) -> bool:
        return len(self._mass) == 1


def mixture(weighted: Iterable[tuple]) -> Dist:
    """Return ``sum_i w_i * D_i`` for pairs ``(w_i, D_i)``.

    Weights must be nonnegative and sum to exactly one.
    """
    out: dict = {}
    total = ZERO
    for w, d in weighted:
        w = as_fraction(w)
        if w < 0:
            raise DomainError(f"negative mixture weight {w}")
        total += w
        if not w:
            continue
        for x, p in d._mass.items():
            out[x] = out.get(x, ZERO) + w * p
    if total != ONE:
        raise DomainError(f"mixture weights sum to {total}, not 1")
    return Dist({x: p for x, p in out.items() if p}, _checked=True)


def mix(alpha, a: Dist, b: Dist) -> Dist:
    """The mixture ``alpha * a + (1 - alpha) * b``."""
    alpha = as_fraction(alpha)
    if not ZERO <= alpha <= ONE:
        raise DomainError(f"mixing coefficient {alpha} outside [0, 1]")
    if alpha == ONE:
        return a
    if alpha == ZERO:
        return b
    return mixture(((alpha, a), (ONE - alpha, b)))
