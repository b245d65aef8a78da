"""Report documents: JSON schema, serialization and the fixed-width text view."""

from __future__ import annotations

import datetime as _dt
import json
import math

import jsonschema
import numpy as np

from . import __version__

SCHEMA_VERSION = "sqc-report/1"

_NUMBER = {"type": ["number", "string", "null"]}  # non-finite floats become strings
_VECTOR = {"type": "array", "items": _NUMBER}
_QUERY = {
    "type": "object",
    "required": ["x", "y", "t"],
    "properties": {"x": _VECTOR, "y": _VECTOR, "t": _NUMBER},
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "sqc report",
    "type": "object",
    "required": ["schema", "tool_version", "timestamp", "command", "config", "exit_status"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "tool_version": {"type": "string"},
        "timestamp": {"type": "string"},
        "command": {"enum": ["check", "estimate", "counterexample", "construction", "minimize", "catalog"]},
        "config": {"type": "object"},
        "function": {"type": "object"},
        "verdict_summaries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["condition", "gamma", "tolerance", "counts", "worst"],
                "properties": {
                    "condition": {"type": "string"},
                    "gamma": _NUMBER,
                    "tolerance": _NUMBER,
                    "counts": {
                        "type": "object",
                        "required": ["pass", "fail", "vacuous", "skipped"],
                        "additionalProperties": {"type": "integer", "minimum": 0},
                    },
                    "worst": {
                        "type": ["object", "null"],
                        "properties": {"margin": _NUMBER, "status": {"type": "string"}, "query": _QUERY},
                    },
                },
            },
        },
        "modulus_estimates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["condition", "gamma_hat", "raw_infimum", "witness", "n_effective", "flags"],
                "properties": {
                    "condition": {"type": "string"},
                    "gamma_hat": {"type": "number", "minimum": 0},
                    "raw_infimum": _NUMBER,
                    "witness": _QUERY,
                    "n_effective": {"type": "integer", "minimum": 1},
                    "flags": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
        "traces": {"type": "array", "items": {"type": "object"}},
        "audit": {
            "type": "object",
            "required": ["reproduced", "hypotheses", "violation_known"],
            "properties": {
                "reproduced": {"type": "boolean"},
                "hypotheses": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["name", "passed"],
                        "properties": {"name": {"type": "string"}, "passed": {"type": "boolean"}},
                    },
                },
            },
        },
        "minimization": {"type": "object"},
        "catalog": {"type": "array", "items": {"type": "object"}},
        "exit_status": {
            "type": "object",
            "required": ["code", "rationale"],
            "properties": {"code": {"enum": [0, 1, 2]}, "rationale": {"type": "string"}},
        },
    },
}


def jsonable(obj):
    """Recursively convert numpy values and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (frozenset, set)):
        return sorted(jsonable(v) for v in obj)
    return obj


def new_report(command: str, config: dict) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "command": command,
        "config": config,
    }


def to_json(report: dict) -> str:
    return json.dumps(jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def validate_report(report: dict) -> None:
    """Raise jsonschema.ValidationError unless ``report`` matches the sqc-report/1 schema."""
    jsonschema.validate(jsonable(report), REPORT_SCHEMA)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    return str(v)


def table(headers, rows) -> str:
    cells = [[_fmt(c) for c in row] for row in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(headers)]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    out = [line, "  ".join("-" * w for w in widths)]
    out += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(out)


def to_text(report: dict) -> str:
    """Human-readable summary of a report."""
    parts = [f"sqc {report['command']}  ({report['schema']}, version {report['tool_version']})"]
    fn = report.get("function")
    if fn:
        parts.append(f"function: {fn.get('id')}  domain: {fn.get('domain')}")
    if "verdict_summaries" in report:
        rows = []
        for s in report["verdict_summaries"]:
            c = s["counts"]
            w = s["worst"] or {}
            q = w.get("query") or {}
            rows.append([s["condition"], s["gamma"], c["pass"], c["fail"], c["vacuous"], c["skipped"],
                         w.get("margin", ""), q.get("x", ""), q.get("y", ""), q.get("t", "")])
        parts.append(table(["condition", "gamma", "pass", "fail", "vacuous", "skipped",
                            "worst_margin", "x", "y", "t"], rows))
    if "modulus_estimates" in report:
        rows = [[e["condition"], e["gamma_hat"], e["raw_infimum"], e["n_effective"],
                 ",".join(e["flags"]) or "-", e["witness"]["x"], e["witness"]["y"], e["witness"]["t"]]
                for e in report["modulus_estimates"]]
        parts.append(table(["condition", "gamma_hat", "raw_infimum", "n_effective", "flags",
                            "x", "y", "t"], rows))
    if "traces" in report:
        rows = [[t["n"], t["partial_sum"], t["limit"], t["error"], t["predicted_error"],
                 t["verdict"]["passed"]] for t in report["traces"]]
        parts.append(table(["n", "S_n", "limit", "L-S_n", "gamma|y-z|^2/(4n)", "passed"], rows))
    if "audit" in report:
        a = report["audit"]
        rows = [[h["name"], "pass" if h["passed"] else "FAIL"] for h in a["hypotheses"]]
        parts.append(table(["hypothesis", "status"], rows))
        v = a["violation_known"]
        parts.append(f"violation: h({_fmt(v['mid'])}) - max(h({_fmt(v['u1'])}), h({_fmt(v['u2'])})) = {_fmt(v['violation'])}")
        parts.append(f"values: {a['values']}")
    if "minimization" in report:
        m = report["minimization"]
        rows = [[k, m[k]] for k in ("bracket", "candidate", "point", "value", "evaluations",
                                    "certificate_radius", "budget_exhausted") if k in m]
        if "growth" in m:
            rows.append(["gamma_too_large", m["growth"]["gamma_too_large"]])
        if "not_unimodal" in m:
            rows += [["not_unimodal_witness", m["not_unimodal"]["witness"]],
                     ["excess", m["not_unimodal"]["excess"]]]
        parts.append(table(["field", "value"], rows))
    if "catalog" in report:
        rows = [[e["id"], e["dimension"], e["domain"]["lower"], e["domain"]["upper"],
                 (e.get("ground_truth") or {}).get("known_modulus"),
                 ",".join((e.get("ground_truth") or {}).get("known_flags", [])) or "-"]
                for e in report["catalog"]]
        parts.append(table(["id", "dim", "lower", "upper", "gamma_true", "flags"], rows))
    st = report["exit_status"]
    parts.append(f"exit {st['code']}: {st['rationale']}")
    return "\n\n".join(parts) + "\n"
