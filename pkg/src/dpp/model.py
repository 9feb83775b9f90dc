"""Agent-environment interface, histories, environments and policies.

A history of length ``t`` is stored as a flat tuple
``(o_0, a_0, o_1, ..., a_{t-1}, o_t)`` of symbol strings, so it has
``2t + 1`` entries, is hashable and prefixes are plain slices.  Trajectories
are histories of length ``T``.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .dist import ZERO, Dist, mixture
from .errors import ContractError, DomainError, PolicyUndefinedError

History = tuple
Trajectory = tuple


# -- history helpers -------------------------------------------------------

def length(h: History) -> int:
    """Number of actions taken in ``h``."""
    return len(h) // 2


def prefix(h: History, t: int) -> History:
    """The length-``t`` sub-history of ``h``."""
    return h[: 2 * t + 1]


def extend(h: History, a: str, o: str) -> History:
    return h + (a, o)


def last_observation(h: History) -> str:
    return h[-1]


def action_at(h: History, t: int) -> str:
    return h[2 * t + 1]


def history_key(h: History) -> str:
    return "|".join(h)


def parse_history_key(key: str) -> History:
    return tuple(key.split("|")) if key else ()


@dataclass(frozen=True)
class Interface:
    """Finite observation and action sets plus a horizon ``T >= 1``.

    Symbol order is the declaration order and fixes every iteration order in
    the package.
    """

    observations: tuple[str, ...]
    actions: tuple[str, ...]
    horizon: int

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(self.observations))
        object.__setattr__(self, "actions", tuple(self.actions))
        if not self.observations or not self.actions:
            raise DomainError("observation and action sets must be non-empty")
        if len(set(self.observations)) != len(self.observations):
            raise DomainError("observation symbols must be distinct")
        if len(set(self.actions)) != len(self.actions):
            raise DomainError("action symbols must be distinct")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise DomainError(f"horizon must be a positive integer, got {self.horizon!r}")

    def histories(self, t: int) -> Iterator[History]:
        """All ``t``-histories in canonical order."""
        if not 0 <= t <= self.horizon:
            raise DomainError(f"history length {t} outside [0, {self.horizon}]")
        steps = list(itertools.product(self.actions, self.observations))
        for o0 in self.observations:
            for tail in itertools.product(steps, repeat=t):
                yield (o0,) + tuple(itertools.chain.from_iterable(tail))

    def trajectories(self) -> Iterator[Trajectory]:
        return self.histories(self.horizon)

    def all_histories(self) -> Iterator[History]:
        for t in range(self.horizon + 1):
            yield from self.histories(t)

    def check_history(self, h: History) -> None:
        if len(h) % 2 != 1 or length(h) > self.horizon:
            raise ContractError(f"malformed history {h!r}")
        for i, s in enumerate(h):
            pool = self.observations if i % 2 == 0 else self.actions
            if s not in pool:
                raise ContractError(f"unknown symbol {s!r} in history {history_key(h)!r}")


def cylinder(h: History, interface: Interface) -> list[Trajectory]:
    """All trajectories whose length-``t`` prefix is ``h``."""
    interface.check_history(h)
    rest = interface.horizon - length(h)
    steps = list(itertools.product(interface.actions, interface.observations))
    return [h + tuple(itertools.chain.from_iterable(tail))
            for tail in itertools.product(steps, repeat=rest)]


class Environment:
    """Initial observation distribution plus a history-dependent transition law.

    ``rho`` maps ``(history, action)`` to a distribution over observations.
    Use :meth:`from_table` for explicit tables; arbitrary callables are
    accepted as memoized lazy views.
    """

    def __init__(self, interface: Interface, rho0: Dist, rho: Callable[[History, str], Dist]):
        self.interface = interface
        self.rho0 = rho0
        self._rho = rho
        self._cache: dict = {}
        for o in rho0:
            if o not in interface.observations:
                raise ContractError(f"initial distribution mentions unknown observation {o!r}")

    @classmethod
    def from_table(cls, interface: Interface, rho0: Dist, table: Mapping,
                   default: Dist | None = None) -> Environment:
        """Build from ``{(history, action): Dist}``; missing rows need ``default``."""
        table = dict(table)

        def rho(h, a):
            try:
                return table[(h, a)]
            except KeyError:
                if default is None:
                    raise ContractError(
                        f"no transition row for history {history_key(h)!r} and action {a!r}"
                    ) from None
                return default

        env = cls(interface, rho0, rho)
        env.table = table
        env.default = default
        return env

    def rho(self, h: History, a: str) -> Dist:
        key = (h, a)
        try:
            return self._cache[key]
        except KeyError:
            pass
        if length(h) >= self.interface.horizon:
            raise ContractError(f"no transitions out of trajectory {history_key(h)!r}")
        d = self._rho(h, a)
        for o in d:
            if o not in self.interface.observations:
                raise ContractError(f"transition to unknown observation {o!r}")
        self._cache[key] = d
        return d

    def successors(self, h: History, a: str) -> Iterator[tuple[str, Fraction, History]]:
        """``(o, rho(o | h, a), h.(a, o))`` for every observation with positive mass."""
        d = self.rho(h, a)
        for o in self.interface.observations:
            p = d.prob(o)
            if p:
                yield o, p, h + (a, o)

    def validate(self, histories: Iterable[History] | None = None) -> None:
        """Evaluate ``rho`` everywhere it may be needed; raises on any bad row."""
        if histories is None:
            histories = attainable(self).decision_histories()
        for h in histories:
            for a in self.interface.actions:
                self.rho(h, a)


@dataclass(frozen=True)
class AttainableSets:
    """Attainable ``t``-histories for ``t = 0..T`` in canonical order."""

    levels: tuple[tuple[History, ...], ...]
    _members: frozenset = field(default=frozenset(), repr=False, compare=False)

    def __contains__(self, h) -> bool:
        return h in self._members

    @property
    def horizon(self) -> int:
        return len(self.levels) - 1

    @property
    def trajectories(self) -> tuple[History, ...]:
        return self.levels[-1]

    def decision_histories(self) -> list[History]:
        """Attainable histories of length less than ``T``, shortest first."""
        return [h for level in self.levels[:-1] for h in level]

    def all(self) -> list[History]:
        return [h for level in self.levels for h in level]


def attainable(env: Environment) -> AttainableSets:
    """Histories reachable with positive probability under some policy."""
    iface = env.interface
    level = [o for o in iface.observations if env.rho0.prob(o)]
    levels = [tuple((o,) for o in level)]
    for _ in range(iface.horizon):
        nxt = []
        for h in levels[-1]:
            for a in iface.actions:
                nxt.extend(child for _, _, child in env.successors(h, a))
        levels.append(tuple(nxt))
    members = frozenset(itertools.chain.from_iterable(levels))
    return AttainableSets(tuple(levels), members)


def is_attainable(env: Environment, h: History) -> bool:
    """Whether ``h`` has positive probability under the policy that replays its actions."""
    env.interface.check_history(h)
    if not env.rho0.prob(h[0]):
        return False
    for t in range(length(h)):
        if not env.rho(prefix(h, t), action_at(h, t)).prob(h[2 * t + 2]):
            return False
    return True


class Policy:
    """A history-indexed action distribution.

    The rule is either a mapping from histories to ``Dist`` over actions or a
    callable returning one.  Querying a history the rule does not cover
    raises :class:`PolicyUndefinedError` unless a ``default`` is given.
    """

    def __init__(self, rule: Mapping | Callable[[History], Dist], default: Dist | None = None):
        self._rule = rule
        self.default = default

    @classmethod
    def deterministic(cls, actions: Mapping[History, str], default: str | None = None) -> Policy:
        table = {h: Dist.point(a) for h, a in actions.items()}
        pol = cls(table, None if default is None else Dist.point(default))
        pol.actions = dict(actions)
        return pol

    def __call__(self, h: History) -> Dist:
        rule = self._rule
        if isinstance(rule, Mapping):
            d = rule.get(h)
        else:
            d = rule(h)
        if d is None:
            if self.default is None:
                raise PolicyUndefinedError(h)
            return self.default
        return d

    def action(self, h: History) -> str:
        """The action of a deterministic policy at ``h``."""
        d = self(h)
        if not d.is_point():
            raise ContractError(f"policy is stochastic at {history_key(h)!r}")
        return d.support[0]

    def is_deterministic_on(self, histories: Iterable[History]) -> bool:
        return all(self(h).is_point() for h in histories)

    def table(self, histories: Iterable[History]) -> dict[History, Dist]:
        return {h: self(h) for h in histories}


@dataclass(frozen=True)
class DPP:
    """An interface, an environment and a preference relation over trajectory distributions."""

    interface: Interface
    env: Environment
    relation: object

    def __post_init__(self):
        if self.env.interface != self.interface:
            raise ContractError("environment was built for a different interface")


class OutcomeCache:
    """Memo of ``D^pi(h)`` and ``D^pi(h.a)`` for one (environment, policy) pair."""

    def __init__(self, env: Environment, pi: Policy):
        self.env = env
        self.pi = pi
        self._hist: dict = {}
        self._act: dict = {}

    def after_action(self, h: History, a: str) -> Dist:
        key = (h, a)
        d = self._act.get(key)
        if d is None:
            d = mixture((p, self.of(child)) for _, p, child in self.env.successors(h, a))
            self._act[key] = d
        return d

    def of(self, h: History) -> Dist:
        d = self._hist.get(h)
        if d is None:
            if length(h) == self.env.interface.horizon:
                d = Dist.point(h)
            else:
                d = mixture((p, self.after_action(h, a)) for a, p in self.pi(h).items())
            self._hist[h] = d
        return d


def outcome_dist(env: Environment, pi: Policy, h: History) -> Dist:
    """Trajectory distribution from ``h`` when following ``pi`` thereafter."""
    env.interface.check_history(h)
    return OutcomeCache(env, pi).of(h)


def outcome_dist_after_action(env: Environment, pi: Policy, h: History, a: str) -> Dist:
    """Trajectory distribution from ``h`` when taking ``a`` first, then following ``pi``."""
    env.interface.check_history(h)
    if length(h) >= env.interface.horizon:
        raise ContractError("cannot act after a full trajectory")
    if a not in env.interface.actions:
        raise ContractError(f"unknown action {a!r}")
    return OutcomeCache(env, pi).after_action(h, a)


def reaching_policy(h: History, interface: Interface) -> Policy:
    """A deterministic policy that replays the actions of ``h`` and otherwise takes the first action."""
    acts = {prefix(h, t): action_at(h, t) for t in range(length(h))}
    return Policy.deterministic(acts, default=interface.actions[0])


def path_probability(env: Environment, pi: Policy, h: History) -> Fraction:
    """Probability that following ``pi`` from the start produces the prefix ``h``."""
    p = env.rho0.prob(h[0])
    for t in range(length(h)):
        if not p:
            return ZERO
        hp = prefix(h, t)
        a = action_at(h, t)
        p *= pi(hp).prob(a) * env.rho(hp, a).prob(h[2 * t + 2])
    return p
