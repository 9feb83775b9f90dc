"""Command-line front end: ``dpp <command> [options]``.

Every command prints one JSON report (sorted keys, exact rationals) and
exits with 0 on success, 2 when a property is refuted or something does not
exist, 3 when the relation fails to rank a compared pair, 4 on malformed
input and 5 when an enumeration limit is hit.  ``repro`` exits 1 if a
built-in case stops reproducing its expected conclusions.

Execution is single-threaded, so ``DPP_NO_PARALLEL`` is accepted and has
no further effect.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import instances
from .errors import ContractError, InputError, LimitExceededError, PolicyUndefinedError, RelationNotTotalError
from .features import (EmbeddedRelation, check_markov_feature, feature_policy_exists, plan_frequency)
from .io import dumps, load_dpp
from .model import attainable, history_key
from .planner import brute_force_optimal, optimal_action_sets, plan_backward, verify_optimal
from .preorders import AXIOMS, PerformanceRelation, TestsetSpec, build_testset, check_axiom
from .representability import fit_feature_reward, fit_utility
from .schemas import COMMANDS

BASIS = {
    "plan": "ordinal backward induction choosing a least-upper-bound action at each attainable history",
    "verify": "local one-step deviation check, optionally against every deterministic competitor",
    "brute-force": "exhaustive deterministic policy enumeration with per-history maximality",
    "check-axioms": "preorder and mixture axioms evaluated on a finite testset",
    "check-mfa": "Markov feature assumption: equal features imply equal transitions and successor features",
    "feature-exists": "intersection of optimal action sets over each feature class",
    "plan-frequency": "backward induction on future feature-action frequencies",
    "fit-utility": "exact utility calibration over trajectories with testset verification",
    "fit-feature-reward": "exact feature-action reward fit through frequency vectors",
    "repro": "built-in worked constructions with their expected conclusions",
}


class _Exit(Exception):
    def __init__(self, status: str, code: int, result: dict | None = None, error: dict | None = None):
        self.status, self.code, self.result, self.error = status, code, result or {}, error


def _policy_json(actions) -> dict:
    return {history_key(h): a for h, a in actions.items()}


def _witness_json(w) -> dict | None:
    if w is None:
        return None
    out = {}
    for k, v in w.items():
        if k == "competitor" and isinstance(v, dict):
            out[k] = _policy_json(v)
        else:
            out[k] = v
    return out


def _need(loaded, attr: str, pointer: str):
    value = getattr(loaded, attr)
    if value is None:
        raise InputError(f"this command needs '{pointer.lstrip('/')}'", pointer)
    return value


def _spec(args) -> TestsetSpec:
    return TestsetSpec(seed=args.seed, count=args.testset_size)


# -- commands ------------------------------------------------------------------

def cmd_plan(args, loaded):
    res = plan_backward(loaded.dpp)
    certs = [{"history": h, "chosen": res.actions[h], "comparisons": row} for h, row in res.certificates.items()]
    return "ok", 0, {"policy": _policy_json(res.actions), "certificates": certs}


def cmd_verify(args, loaded):
    pi = _need(loaded, "policy", "/policy")
    try:
        v = verify_optimal(loaded.dpp, pi, global_check=args.global_check)
    except PolicyUndefinedError as exc:
        raise InputError(str(exc), "/policy") from None
    code = {"optimal": 0, "refuted": 2, "relation-not-total": 3}[v.verdict]
    return v.verdict, code, {"verdict": v.verdict, "scope": v.scope, "witness": _witness_json(v.witness)}


def _brute_force_report(dpp, limit_policies):
    att = attainable(dpp.env)
    n_dec = len(att.decision_histories())
    n_pol = len(dpp.interface.actions) ** n_dec
    if n_pol > limit_policies:
        raise LimitExceededError(n_pol, limit_policies, "deterministic policies")
    bf = brute_force_optimal(dpp)
    phi = dpp.relation.phi if isinstance(dpp.relation, PerformanceRelation) else None
    certs = None
    if bf.certificate is not None:
        certs = []
        for c in bf.certificate:
            item = {"policy": _policy_json(c["policy"]), "history": c["history"],
                    "competitor": _policy_json(c["competitor"]), "policy_outcome": c["policy_outcome"],
                    "competitor_outcome": c["competitor_outcome"], "compare": c["compare"]}
            if phi is not None:
                item["policy_value"] = phi(c["policy_outcome"])
                item["competitor_value"] = phi(c["competitor_outcome"])
            certs.append(item)
    result = {"optimal_policies": [_policy_json(p) for p in bf.optimal], "n_policies": bf.n_policies,
              "decision_histories": list(bf.decision_histories), "caveat": bf.caveat, "certificates": certs}
    return bf, result


def cmd_brute_force(args, loaded):
    bf, result = _brute_force_report(loaded.dpp, args.limit_policies)
    if bf.exists:
        return "ok", 0, result
    return "no-optimal-policy", 2, result


def _axiom_reports(rel, omega, spec, names):
    ts = build_testset(omega, spec)
    out = {}
    for ax in names:
        rep = check_axiom(rel, ax, ts)
        w = rep.witness
        out[ax] = {"verdict": rep.verdict, "checked": rep.testset_size, "note": rep.note,
                   "witness": None if w is None else {"dists": list(w.dists), "alpha": w.alpha,
                                                      "observed": w.observed}}
    return out, len(ts)


def cmd_check_axioms(args, loaded):
    names = [args.axiom] if args.axiom else list(AXIOMS)
    omega = attainable(loaded.dpp.env).trajectories
    reports, size = _axiom_reports(loaded.dpp.relation, omega, _spec(args), names)
    refuted = any(r["verdict"] == "refuted" for r in reports.values())
    return ("refuted" if refuted else "passed-on-testset"), (2 if refuted else 0), \
        {"axioms": reports, "testset_size": size}


def cmd_check_mfa(args, loaded):
    phi = _need(loaded, "feature_map", "/feature_map")
    rep = check_markov_feature(loaded.dpp, phi)
    return rep.verdict, (0 if rep.holds else 2), {"verdict": rep.verdict, "witness": rep.witness}


def cmd_feature_exists(args, loaded):
    phi = _need(loaded, "feature_map", "/feature_map")
    dpp = loaded.dpp
    plan = plan_backward(dpp)
    try:
        sets = optimal_action_sets(dpp, plan.policy)
    except ContractError as exc:
        return "refuted", 2, {"verdict": "planner-output-not-optimal", "message": str(exc)}
    res = feature_policy_exists(dpp, phi, sets)
    if res.exists:
        table = [{"t": t, "feature": x, "action": a} for (t, x), a in res.table.items()]
        return "exists", 0, {"verdict": "exists", "policy": table}
    w = res.witness
    return "not-exists", 2, {"verdict": "not-exists",
                             "witness": {"t": w["t"], "feature": w["feature"], "histories": list(w["histories"]),
                                         "optimal_sets": {history_key(h): list(s) for h, s in w["sets"].items()}}}


def cmd_plan_frequency(args, loaded):
    rel = loaded.dpp.relation
    if not isinstance(rel, EmbeddedRelation):
        raise InputError("plan-frequency needs a frequency_embedded preference", "/preference/kind")
    res = plan_frequency(loaded.dpp, rel.rel_circ, rel.phi, rel.gamma)
    return "ok", 0, {"policy": _policy_json(res.actions), "feature_based": res.extras["feature_based"],
                     "mfa": res.extras["mfa"].verdict,
                     "f_star": {history_key(h): list(s) for h, s in res.extras["f_star"].items()}}


def _fit_json(fit, utility_items=False):
    u = fit.utility
    if u is not None and utility_items:
        u = [{"feature": x, "action": a, "value": v} for (x, a), v in u.items()]
    return {"verdict": fit.verdict, "utility": u, "margin": fit.margin, "witness": fit.witness,
            "testset_size": fit.testset_size, "note": fit.note}


def cmd_fit_utility(args, loaded):
    omega = attainable(loaded.dpp.env).trajectories
    fit = fit_utility(loaded.dpp.relation, omega, _spec(args))
    return fit.verdict, (0 if fit.representable else 2), _fit_json(fit)


def cmd_fit_feature_reward(args, loaded):
    phi = _need(loaded, "feature_map", "/feature_map")
    gamma = _need(loaded, "gamma", "/gamma")
    dpp = loaded.dpp
    fit = fit_feature_reward(dpp.relation, phi, gamma, attainable(dpp.env).trajectories,
                             dpp.interface.actions, _spec(args))
    return fit.verdict, (0 if fit.representable else 2), _fit_json(fit, utility_items=True)


# -- built-in reproductions ----------------------------------------------------------

def repro_no_optimal(spec: TestsetSpec) -> tuple[str, int, dict]:
    dpp = instances.no_optimal()
    bf, result = _brute_force_report(dpp, 1 << 20)
    pair = next((c for c in result["certificates"] or []
                 if c["history"] == instances.CYLINDER_ROOT and c["policy_value"] == 0 and c["competitor_value"] == 1),
                None)
    checks = {
        "no_optimal_policy": not bf.exists,
        "policies_enumerated": bf.n_policies == 32,
        "every_policy_refuted": result["certificates"] is not None and len(result["certificates"]) == 32,
        "cylinder_pair_0_vs_1": pair is not None,
    }
    result = {"checks": checks, "brute_force": result, "contradiction": pair}
    ok = all(checks.values())
    return ("no-optimal-policy", 2, result) if ok else ("not-reproduced", 1, result)


def _repro_suite(dpp, spec, expect_pass, expect_refuted):
    omega = attainable(dpp.env).trajectories
    reports, size = _axiom_reports(dpp.relation, omega, spec, list(AXIOMS))
    plan = plan_backward(dpp)
    verdict = verify_optimal(dpp, plan.policy)
    fit = fit_utility(dpp.relation, omega, spec)
    checks = {f"{ax}_passes": reports[ax]["verdict"] == "passed-on-testset" for ax in expect_pass}
    checks.update({f"{ax}_refuted": reports[ax]["verdict"] == "refuted" for ax in expect_refuted})
    checks["plan_verified_optimal"] = verdict.optimal
    checks["fit_utility_refuted"] = fit.verdict == "refuted-on-testset"
    result = {"checks": checks, "axioms": reports, "testset_size": size, "policy": _policy_json(plan.actions),
              "verify": verdict.verdict, "fit_utility": _fit_json(fit)}
    ok = all(checks.values())
    return ("reproduced", 0, result) if ok else ("not-reproduced", 1, result)


def repro_late_risk(spec):
    return _repro_suite(instances.late_risk(), spec, ["totality", "transitivity", "consistency"],
                        ["convexity", "interpolation"])


def repro_late_lexicographic(spec):
    return _repro_suite(instances.late_lexicographic(), spec,
                        ["totality", "transitivity", "consistency", "convexity"], ["interpolation"])


REPRO = {"prop13": repro_no_optimal, "example13": repro_late_risk, "example26": repro_late_lexicographic}


def cmd_repro(args, loaded):
    if args.case not in REPRO:
        raise InputError(f"unknown case {args.case!r}; choose from {sorted(REPRO)}", "/case")
    status, code, result = REPRO[args.case](_spec(args))
    result["case"] = args.case
    return status, code, result


HANDLERS = {
    "plan": cmd_plan, "verify": cmd_verify, "brute-force": cmd_brute_force, "check-axioms": cmd_check_axioms,
    "check-mfa": cmd_check_mfa, "feature-exists": cmd_feature_exists, "plan-frequency": cmd_plan_frequency,
    "fit-utility": cmd_fit_utility, "fit-feature-reward": cmd_fit_feature_reward, "repro": cmd_repro,
}
assert tuple(HANDLERS) == COMMANDS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpp", description="Plan and analyse direct preference processes.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=BASIS[name])
        if name == "repro":
            p.add_argument("--case", required=True, help="one of " + ", ".join(instances.BUILTIN_CASES))
        else:
            p.add_argument("--input", required=True, help="process definition (JSON)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--testset-size", type=int, default=10, help="random distributions per testset")
        p.add_argument("--limit-policies", type=int, default=1 << 20)
        p.add_argument("--output", help="also write the report here")
        if name == "check-axioms":
            p.add_argument("--axiom", choices=AXIOMS)
        if name == "verify":
            p.add_argument("--global", dest="global_check", action="store_true",
                           help="compare against every deterministic competitor as well")
    return parser


def run(argv=None) -> tuple[int, str]:
    """Execute one command; returns the exit code and the JSON report text."""
    args = build_parser().parse_args(argv)
    report = {"command": args.command, "basis": BASIS[args.command], "seed": args.seed}
    try:
        loaded = None if args.command == "repro" else load_dpp(args.input)
        status, code, result = HANDLERS[args.command](args, loaded)
    except InputError as exc:
        status, code, result = "input-error", 4, {}
        report["error"] = {"message": exc.message, "pointer": exc.pointer}
    except RelationNotTotalError as exc:
        status, code = "relation-not-total", 3
        result = {"reason": exc.reason, "pair": list(exc.pair)}
    except LimitExceededError as exc:
        status, code, result = "limit-exceeded", 5, {"count": exc.count, "limit": exc.limit}
    report.update(status=status, exit_code=code, result=result)
    text = dumps(report)
    if args.output:
        Path(args.output).write_text(text)
    return code, text


def main(argv=None) -> int:
    code, text = run(argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
