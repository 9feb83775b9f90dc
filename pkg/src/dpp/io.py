"""Reading process definitions from JSON and writing exact JSON reports.

Rationals travel as ``"num/den"`` strings and histories as ``"o0|a0|o1"``
keys.  Validation runs against :data:`dpp.schemas.DPP_FILE` first, so
structural mistakes are reported with a JSON pointer.
"""

from __future__ import annotations

import enum
import json
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from .dist import Dist, as_fraction
from .errors import ContractError, DomainError, InputError
from .features import (FeatureMap, GammaWeights, embedded_relation, frequency_reward_relation,
                       identity_feature, k_window_feature, table_feature)
from .model import DPP, Environment, History, Interface, Policy, history_key, parse_history_key
from .preorders import (expected_reward_relation, expected_utility_relation, lexicographic_relation,
                        risk_relation)
from .schemas import DPP_FILE

_VALIDATOR = Draft202012Validator(DPP_FILE)


def frac_str(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _key(k) -> str:
    if isinstance(k, tuple) and all(isinstance(s, str) for s in k):
        return history_key(k)
    if isinstance(k, tuple):
        return "#".join(_key(x) for x in k)
    return str(k)


def encode(obj):
    """Turn results into JSON-ready values with exact rationals and stable key order."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return frac_str(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Dist):
        return {_key(k): frac_str(v) for k, v in obj.items()}
    if isinstance(obj, Mapping):
        return {_key(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, tuple) and all(isinstance(s, str) for s in obj) and obj:
        return history_key(obj)
    if isinstance(obj, (list, tuple)):
        return [encode(x) for x in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(encode(x) for x in obj)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(report) -> str:
    return json.dumps(encode(report), sort_keys=True, indent=2) + "\n"


@dataclass
class Loaded:
    dpp: DPP
    feature_map: FeatureMap | None
    gamma: GammaWeights | None
    policy: Policy | None
    raw: dict


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else ""


def _rdist(mapping: Mapping, where: str, pool) -> Dist:
    for k in mapping:
        if k not in pool:
            raise InputError(f"unknown symbol {k!r}", f"{where}/{k}")
    try:
        return Dist({k: as_fraction(v) for k, v in mapping.items()})
    except (DomainError, ZeroDivisionError) as exc:
        raise InputError(str(exc), where) from None


def _rmap(mapping: Mapping, where: str, iface: Interface, full: bool = False) -> dict:
    out = {}
    for k, v in mapping.items():
        h = parse_history_key(k)
        try:
            iface.check_history(h)
        except ContractError as exc:
            raise InputError(str(exc), f"{where}/{k}") from None
        if full and len(h) != 2 * iface.horizon + 1:
            raise InputError(f"{k!r} is not a full trajectory", f"{where}/{k}")
        try:
            out[h] = as_fraction(v)
        except (DomainError, ZeroDivisionError) as exc:
            raise InputError(str(exc), f"{where}/{k}") from None
    return out


def _feature_map(spec: Mapping, iface: Interface) -> FeatureMap:
    kind = spec["kind"]
    try:
        if kind == "k_window":
            return k_window_feature(spec["k"], iface)
        if kind == "identity":
            return identity_feature(iface)
        return table_feature(iface, {parse_history_key(k): v for k, v in spec["map"].items()})
    except (DomainError, ContractError) as exc:
        raise InputError(str(exc), "/feature_map") from None


def _preference(spec: Mapping, iface: Interface, phi, gamma):
    kind = spec["kind"]
    w = "/preference"
    if kind == "expected_reward":
        r = _rmap(spec["r"], f"{w}/r", iface)
        return expected_reward_relation(lambda h: r.get(h, Fraction(0)), iface.horizon)
    if kind == "expected_utility":
        return expected_utility_relation(_rmap(spec["u"], f"{w}/u", iface, full=True))
    if kind == "risk":
        u = _rmap(spec["u"], f"{w}/u", iface, full=True)
        event = []
        for i, k in enumerate(spec["event"]):
            h = parse_history_key(k)
            if h not in u:
                raise InputError("event trajectory has no utility", f"{w}/event/{i}")
            event.append(h)
        omega = [h for h in iface.trajectories() if h in u]
        try:
            return risk_relation(u, as_fraction(spec["beta"]), event, omega)
        except (ContractError, DomainError) as exc:
            raise InputError(str(exc), w) from None
    if kind == "lexicographic":
        return lexicographic_relation(_rmap(spec["u1"], f"{w}/u1", iface, full=True),
                                      _rmap(spec["u2"], f"{w}/u2", iface, full=True))
    # frequency_embedded
    if phi is None or gamma is None:
        raise InputError("frequency_embedded preferences need feature_map and gamma", w)
    by_key = {history_key(x) if isinstance(x, tuple) else str(x): x for x in phi.features}
    r = {}
    for i, item in enumerate(spec["rel_circ"]["r"]):
        x = by_key.get(item["feature"])
        if x is None:
            raise InputError(f"unknown feature {item['feature']!r}", f"{w}/rel_circ/r/{i}/feature")
        if item["action"] not in iface.actions:
            raise InputError(f"unknown action {item['action']!r}", f"{w}/rel_circ/r/{i}/action")
        r[(x, item["action"])] = as_fraction(item["value"])
    full = {(x, a): r.get((x, a), Fraction(0)) for x in phi.features for a in iface.actions}
    return embedded_relation(frequency_reward_relation(full), phi, gamma)


def load_dpp(data: Mapping | str | Path) -> Loaded:
    """Validate and build a process from a parsed JSON object or a file path."""
    if isinstance(data, (str, Path)):
        try:
            data = json.loads(Path(data).read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc.msg}", "") from None
        except OSError as exc:
            raise InputError(f"cannot read input: {exc.strerror}", "") from None
    err = best_match(_VALIDATOR.iter_errors(data))
    if err is not None:
        raise InputError(err.message, _pointer(err.absolute_path))
    spec = data["interface"]
    try:
        iface = Interface(tuple(spec["observations"]), tuple(spec["actions"]), spec["horizon"])
    except DomainError as exc:
        raise InputError(str(exc), "/interface") from None
    rho0 = _rdist(data["rho0"], "/rho0", iface.observations)
    table = {}
    for i, row in enumerate(data.get("rho", [])):
        h: History = tuple(row["history"])
        try:
            iface.check_history(h)
        except ContractError as exc:
            raise InputError(str(exc), f"/rho/{i}/history") from None
        if len(h) >= 2 * iface.horizon + 1:
            raise InputError("no transitions out of a full trajectory", f"/rho/{i}/history")
        if row["action"] not in iface.actions:
            raise InputError(f"unknown action {row['action']!r}", f"/rho/{i}/action")
        if (h, row["action"]) in table:
            raise InputError("duplicate transition row", f"/rho/{i}")
        table[(h, row["action"])] = _rdist(row["dist"], f"/rho/{i}/dist", iface.observations)
    default = _rdist(data["default_dist"], "/default_dist", iface.observations) if "default_dist" in data else None
    env = Environment.from_table(iface, rho0, table, default)
    try:
        env.validate()
    except ContractError as exc:
        raise InputError(str(exc), "/rho") from None
    phi = _feature_map(data["feature_map"], iface) if "feature_map" in data else None
    gamma = None
    if "gamma" in data:
        if len(data["gamma"]) != iface.horizon:
            raise InputError(f"gamma needs {iface.horizon} weights", "/gamma")
        try:
            gamma = GammaWeights(tuple(as_fraction(g) for g in data["gamma"]))
        except DomainError as exc:
            raise InputError(str(exc), "/gamma") from None
    rel = _preference(data["preference"], iface, phi, gamma)
    policy = None
    if "policy" in data:
        acts = {}
        for k, a in data["policy"].items():
            if a not in iface.actions:
                raise InputError(f"unknown action {a!r}", f"/policy/{k}")
            acts[parse_history_key(k)] = a
        policy = Policy.deterministic(acts)
    return Loaded(DPP(iface, env, rel), phi, gamma, policy, dict(data))
