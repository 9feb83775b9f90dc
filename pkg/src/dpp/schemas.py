"""JSON schemas for process definition files and command reports."""

from __future__ import annotations

import json
import sys

RATIONAL = {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*[1-9]\d*)?\s*$"}
HISTORY_KEY = {"type": "string"}
RATIONAL_MAP = {"type": "object", "additionalProperties": RATIONAL}

_PREF_VARIANTS = [
    {
        "type": "object",
        "required": ["kind", "r"],
        "properties": {"kind": {"const": "expected_reward"}, "r": RATIONAL_MAP},
        "additionalProperties": False,
    },
    {
        "type": "object",
        "required": ["kind", "u"],
        "properties": {"kind": {"const": "expected_utility"}, "u": RATIONAL_MAP},
        "additionalProperties": False,
    },
    {
        "type": "object",
        "required": ["kind", "u", "beta", "event"],
        "properties": {
            "kind": {"const": "risk"},
            "u": RATIONAL_MAP,
            "beta": RATIONAL,
            "event": {"type": "array", "items": HISTORY_KEY, "minItems": 1},
        },
        "additionalProperties": False,
    },
    {
        "type": "object",
        "required": ["kind", "u1", "u2"],
        "properties": {"kind": {"const": "lexicographic"}, "u1": RATIONAL_MAP, "u2": RATIONAL_MAP},
        "additionalProperties": False,
    },
    {
        "type": "object",
        "required": ["kind", "rel_circ"],
        "properties": {
            "kind": {"const": "frequency_embedded"},
            "rel_circ": {
                "type": "object",
                "required": ["kind", "r"],
                "properties": {
                    "kind": {"const": "linear"},
                    "r": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["feature", "action", "value"],
                            "properties": {"feature": {"type": "string"}, "action": {"type": "string"},
                                           "value": RATIONAL},
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
        "additionalProperties": False,
    },
]

PREFERENCE = {
    "type": "object",
    "required": ["kind"],
    "properties": {"kind": {"enum": ["expected_reward", "expected_utility", "risk", "lexicographic",
                                     "frequency_embedded"]}},
    "allOf": [
        {"if": {"properties": {"kind": {"const": v["properties"]["kind"]["const"]}}}, "then": v}
        for v in _PREF_VARIANTS
    ],
}

FEATURE_MAP = {
    "oneOf": [
        {"type": "object", "required": ["kind", "k"],
         "properties": {"kind": {"const": "k_window"}, "k": {"type": "integer", "minimum": 1}},
         "additionalProperties": False},
        {"type": "object", "required": ["kind", "map"],
         "properties": {"kind": {"const": "table"},
                        "map": {"type": "object", "additionalProperties": {"type": "string"}}},
         "additionalProperties": False},
        {"type": "object", "required": ["kind"], "properties": {"kind": {"const": "identity"}},
         "additionalProperties": False},
    ]
}

SYMBOLS = {"type": "array", "items": {"type": "string", "minLength": 1, "pattern": r"^[^|]+$"},
           "minItems": 1, "uniqueItems": True}

DPP_FILE = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Direct preference process definition",
    "type": "object",
    "required": ["interface", "rho0", "preference"],
    "properties": {
        "interface": {
            "type": "object",
            "required": ["observations", "actions", "horizon"],
            "properties": {
                "observations": SYMBOLS,
                "actions": SYMBOLS,
                "horizon": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "rho0": RATIONAL_MAP,
        "rho": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["history", "action", "dist"],
                "properties": {
                    "history": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                    "action": {"type": "string"},
                    "dist": RATIONAL_MAP,
                },
                "additionalProperties": False,
            },
        },
        "default_dist": RATIONAL_MAP,
        "preference": PREFERENCE,
        "feature_map": FEATURE_MAP,
        "gamma": {"type": "array", "items": RATIONAL, "minItems": 1},
        "policy": {"type": "object", "additionalProperties": {"type": "string"}},
    },
    "additionalProperties": False,
}

COMMANDS = ("plan", "verify", "brute-force", "check-axioms", "check-mfa", "feature-exists",
            "plan-frequency", "fit-utility", "fit-feature-reward", "repro")

_STATUS = {"enum": ["ok", "optimal", "refuted", "relation-not-total", "input-error", "limit-exceeded",
                    "holds", "violated", "exists", "not-exists", "representable", "refuted-on-testset",
                    "infeasible", "passed-on-testset", "inconclusive", "reproduced", "not-reproduced",
                    "no-optimal-policy"]}

REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Command report",
    "type": "object",
    "required": ["command", "basis", "status", "exit_code", "result"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "basis": {"type": "string", "minLength": 1},
        "status": _STATUS,
        "exit_code": {"enum": [0, 1, 2, 3, 4, 5]},
        "seed": {"type": "integer"},
        "result": {"type": "object"},
        "error": {
            "type": "object",
            "required": ["message"],
            "properties": {"message": {"type": "string"}, "pointer": {"type": "string"}},
        },
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"status": {"const": "input-error"}}},
         "then": {"required": ["error"], "properties": {"exit_code": {"const": 4}}}},
        {"if": {"properties": {"command": {"const": "plan"}, "exit_code": {"const": 0}}},
         "then": {"properties": {"result": {"required": ["policy", "certificates"]}}}},
        {"if": {"properties": {"command": {"const": "brute-force"}, "exit_code": {"enum": [0, 2]}}},
         "then": {"properties": {"result": {"required": ["optimal_policies", "n_policies", "caveat"]}}}},
        {"if": {"properties": {"command": {"const": "check-axioms"}, "exit_code": {"enum": [0, 2]}}},
         "then": {"properties": {"result": {"required": ["axioms", "testset_size"]}}}},
        {"if": {"properties": {"command": {"enum": ["fit-utility", "fit-feature-reward"]},
                               "exit_code": {"enum": [0, 2]}}},
         "then": {"properties": {"result": {"required": ["verdict", "testset_size"]}}}},
    ],
}

SCHEMAS = {"dpp": DPP_FILE, "report": REPORT}


def main(argv=None) -> int:
    """Print a schema by name (``dpp`` or ``report``)."""
    argv = sys.argv[1:] if argv is None else argv
    name = argv[0] if argv else "report"
    print(json.dumps(SCHEMAS[name], indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
