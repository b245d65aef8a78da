"""``sqc`` command line: check, estimate, counterexample, construction, minimize, catalog.

Exit codes: 0 when everything passes, 1 when a condition is falsified (or a
segment is not unimodal, or the growth diagnostics reject gamma), 2 on usage
or evaluation errors.

A ``--config`` file holds one ``key = value`` per line using the long flag
names (``n-random = 500``); ``#`` starts a comment. Flags given on the command
line override file values. Vectors are comma separated (``--x=-1,0.5``);
``--box`` takes either two numbers (a cube) or the n lower bounds followed by
the n upper bounds.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import conditions as C
from . import function_model as fm
from . import report as R
from .constructions import partition_chain, saks_inequality_check
from .counterexample import run_audit
from .dini import StepSchedule
from .errors import NotUnimodal, SqcError
from .expr import max_variable, parse
from .minimizer import evaluation_bound, growth_diagnostics, minimize_segment, replay
from .modulus import ESTIMATORS, estimate_from_queries, growth_queries

EXIT_PASS, EXIT_FALSIFIED, EXIT_ERROR = 0, 1, 2
DEFAULT_SEED = 42
COMMANDS = ("check", "estimate", "counterexample", "construction", "minimize", "catalog")


class UsageError(Exception):
    pass


# -- argument parsing ----------------------------------------------------------


def _vector(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _names(text: str) -> tuple:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _gamma(text: str):
    if text == "estimate":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"gamma must be a number or 'estimate', got {text!r}")


def _common(p: argparse.ArgumentParser, function: bool = True, sampling: bool = True) -> None:
    if function:
        src = p.add_argument_group("function source")
        src.add_argument("--catalog", help="catalog id (see `sqc catalog`)")
        src.add_argument("--expr", help="expression in x1..xn, e.g. 'x1^2 + abs(x2)'")
        src.add_argument("--dim", type=int, help="dimension for --expr")
        src.add_argument("--box", type=float, nargs="+",
                         help="domain: LO HI (cube) or n lower bounds then n upper bounds")
    if sampling:
        s = p.add_argument_group("sampling")
        s.add_argument("--seed", type=int, help=f"sampling seed (else $SQC_SEED, else {DEFAULT_SEED})")
        s.add_argument("--n-random", type=int, default=2000)
        s.add_argument("--grid-per-axis", type=int)
        s.add_argument("--t-grid", type=int, default=15)
        s.add_argument("--sep-min", type=float, default=C.DEFAULT_SEP_MIN)
        s.add_argument("--dini-t0", type=float, default=StepSchedule.t0)
        s.add_argument("--dini-rho", type=float, default=StepSchedule.rho)
        s.add_argument("--dini-k", type=int, default=StepSchedule.K)
        s.add_argument("--dini-tail", type=int, default=StepSchedule.tail)
        s.add_argument("--jobs", type=int, default=1, help="worker threads for suite/estimate runs")
    p.add_argument("--tol", type=float, default=C.DEFAULT_TOL)
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--format", choices=("json", "text", "csv"), default="text")
    p.add_argument("--config", help="flat key = value file; command-line flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqc", description="Numerical checks for strongly quasiconvex functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run condition checkers over a sampled query set")
    _common(p)
    p.add_argument("--gamma", type=_gamma, default="estimate",
                   help="modulus to test, or 'estimate' to use the definition estimate")
    p.add_argument("--conditions", type=_names, default=(C.DEFINITION,),
                   help=f"comma list from {','.join(C.CONDITIONS)}")
    p.add_argument("--xbar", type=_vector, help="minimizer for quadratic_growth (default: best sample)")

    p = sub.add_parser("estimate", help="empirical moduli per characterization")
    _common(p)
    p.add_argument("--conditions", type=_names, default=ESTIMATORS)
    p.add_argument("--xbar", type=_vector)

    p = sub.add_parser("counterexample", help="audit the polynomial counterexample")
    _common(p, function=False, sampling=False)
    p.add_argument("--v-grid", type=int, default=401)

    p = sub.add_parser("construction", help="replay the partition chain and the integrated Dini bound")
    _common(p, sampling=False)
    p.add_argument("--x", type=_vector, required=True)
    p.add_argument("--y", type=_vector, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--n-list", type=_ints, default=(1, 4, 16, 64))

    p = sub.add_parser("minimize", help="bracket search on the segment from x to y")
    _common(p, sampling=False)
    p.add_argument("--x", type=_vector, required=True)
    p.add_argument("--y", type=_vector, required=True)
    p.add_argument("--target-width", type=float, default=1e-6)
    p.add_argument("--gamma", type=float, help="run growth diagnostics at this modulus")
    p.add_argument("--validate", action="store_true", help="scan for non-unimodality first")
    p.add_argument("--max-eval", type=int, default=1000)
    p.add_argument("--probes", type=int, default=33)

    p = sub.add_parser("catalog", help="list built-in functions with ground truth")
    _common(p, function=False, sampling=False)
    return parser


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(sub: argparse.ArgumentParser, values: dict) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        try:
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            elif action.nargs == "+":
                defaults[key] = [action.type(v) for v in raw.replace(",", " ").split()]
            else:
                defaults[key] = action.type(raw) if action.type else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config key {key!r}: {exc}")
        action.required = False
    sub.set_defaults(**defaults)


def parse_args(argv) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    if known.config and command:
        # file values become defaults before parsing, so they can satisfy required flags
        sub = parser._subparsers._group_actions[0].choices[command]
        _apply_config(sub, read_config(known.config))
    return parser.parse_args(argv)


# -- resolved configuration ----------------------------------------------------


@dataclass
class RunConfig:
    """Everything a run depends on; echoed into the report."""

    command: str
    catalog: Optional[str] = None
    expr: Optional[str] = None
    dim: Optional[int] = None
    box: Optional[list] = None
    seed: Optional[int] = None
    options: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace, environ=os.environ) -> "RunConfig":
        d = vars(args).copy()
        cfg = cls(command=d.pop("command"))
        for k in ("catalog", "expr", "dim", "box", "seed"):
            setattr(cfg, k, d.pop(k, None))
        d.pop("config", None)
        if "n_random" in d:  # sampling commands carry a seed
            if cfg.seed is None:
                env = environ.get("SQC_SEED")
                try:
                    cfg.seed = int(env) if env else DEFAULT_SEED
                except ValueError:
                    raise UsageError(f"SQC_SEED must be an integer, got {env!r}")
        cfg.options = d
        if cfg.catalog is not None and cfg.expr is not None:
            raise UsageError("give exactly one of --catalog and --expr")
        g = d.get("gamma")
        if isinstance(g, float) and not g >= 0:
            raise UsageError("gamma must be nonnegative")
        return cfg

    def opt(self, key, default=None):
        return self.options.get(key, default)

    def sample_spec(self) -> C.SampleSpec:
        return C.SampleSpec(seed=self.seed, n_random=self.opt("n_random"),
                            grid_per_axis=self.opt("grid_per_axis"), t_grid=self.opt("t_grid"),
                            sep_min=self.opt("sep_min"))

    def schedule(self) -> StepSchedule:
        return StepSchedule(self.opt("dini_t0"), self.opt("dini_rho"), self.opt("dini_k"),
                            self.opt("dini_tail"))

    def to_dict(self) -> dict:
        d = asdict(self)
        opts = d.pop("options")
        opts.pop("out", None)
        opts.pop("format", None)
        opts.pop("jobs", None)
        d.update(opts)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _box(values, dim: int) -> fm.DomainBox:
    if len(values) == 2:
        return fm.DomainBox.cube(values[0], values[1], dim)
    if len(values) == 2 * dim:
        return fm.DomainBox(tuple(values[:dim]), tuple(values[dim:]))
    raise UsageError(f"--box needs 2 or {2 * dim} numbers for dimension {dim}, got {len(values)}")


def load_function(cfg: RunConfig) -> fm.FunctionSpec:
    if cfg.catalog is not None:
        try:
            f = fm.get(cfg.catalog)
        except KeyError as exc:
            raise UsageError(exc.args[0])
        if cfg.box is not None:
            f = f.with_domain(_box(cfg.box, f.dimension))
        return f
    if cfg.expr is None:
        raise UsageError("a function source is required: --catalog ID or --expr EXPR --box ...")
    if cfg.box is None:
        raise UsageError("--expr needs --box")
    dim = cfg.dim
    if dim is None:
        dim = len(cfg.box) // 2 if len(cfg.box) > 2 else max(1, max_variable(parse(cfg.expr, 10 ** 6)))
    box = _box(cfg.box, dim)
    return fm.function_from_expression(cfg.expr, box.lower, box.upper)


def _function_info(f: fm.FunctionSpec) -> dict:
    return {"id": f.id, "source": f.source, "dimension": f.dimension, "domain": f.domain.to_dict(),
            "ground_truth": None if f.ground_truth is None else f.ground_truth.to_dict()}


def _vec(v, f: fm.FunctionSpec, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (f.dimension,):
        raise UsageError(f"--{name} needs {f.dimension} components, got {v.size}")
    return v


# -- commands ------------------------------------------------------------------


def _batch_summary(batch: C.ConditionBatch) -> dict:
    i = batch.worst_index()
    worst = None
    if i is not None:
        v = batch.verdict(i)
        worst = {"margin": v.margin, "status": v.status, "query": v.query.to_dict()}
    return {"condition": batch.condition, "gamma": batch.gamma, "tolerance": batch.tolerance,
            "counts": batch.counts(), "worst": worst, "identity_residual": batch.identity_residual}


def cmd_check(cfg: RunConfig, rep: dict) -> tuple:
    f = load_function(cfg)
    spec = cfg.sample_spec().resolved(f.dimension)
    conds = cfg.opt("conditions")
    gamma = cfg.opt("gamma")
    if gamma == "estimate":
        est = estimate_from_queries(f, C.DEFINITION, spec.queries(f.domain), spec, cfg.opt("tol"))
        gamma = est.gamma_hat
        rep["modulus_estimates"] = [est.to_dict()]
    rep["config"]["gamma_resolved"] = gamma
    rep["function"] = _function_info(f)
    xbar = cfg.opt("xbar")
    suite = C.run_suite(f, conds, gamma, spec, cfg.opt("tol"), cfg.schedule(),
                        None if xbar is None else _vec(xbar, f, "xbar"), cfg.opt("jobs"))
    rep["verdict_summaries"] = [_batch_summary(suite.batches[c]) for c in C.CONDITIONS if c in suite.batches]
    if suite.xbar is not None:
        rep["xbar"] = list(suite.xbar)
    if suite.any_failed:
        w = suite.worst()
        q = w.query
        return EXIT_FALSIFIED, (f"{w.condition} falsified at gamma={gamma:g}: margin {w.margin:.6g} "
                                f"at x={list(q.x)}, y={list(q.y)}, t={q.t:g}")
    return EXIT_PASS, f"no failures over {sum(suite.counts().values())} queries at gamma={gamma:g}"


def cmd_estimate(cfg: RunConfig, rep: dict) -> tuple:
    f = load_function(cfg)
    spec = cfg.sample_spec().resolved(f.dimension)
    tol, schedule = cfg.opt("tol"), cfg.schedule()
    conds = list(cfg.opt("conditions"))
    bad = set(conds) - set(ESTIMATORS)
    if bad:
        raise UsageError(f"no estimator for {sorted(bad)}; choose from {','.join(ESTIMATORS)}")
    rep["function"] = _function_info(f)
    xbar = cfg.opt("xbar")
    if C.QUADRATIC_GROWTH in conds:
        if xbar is not None:
            xbar = _vec(xbar, f, "xbar")
        elif f.ground_truth is not None and f.ground_truth.known_minimizer is not None:
            xbar = np.array(f.ground_truth.known_minimizer)
        else:
            xbar = C.sample_minimizer(f, spec)
        rep["xbar"] = xbar.tolist()

    def job(cond):
        if cond == C.QUADRATIC_GROWTH:
            q = growth_queries(f, xbar, spec)
        elif cond == C.DINI:
            q = spec.pairs(f.domain)
        else:
            q = spec.queries(f.domain)
        try:
            return estimate_from_queries(f, cond, q, spec, tol, schedule)
        except SqcError as exc:
            return exc

    with ThreadPoolExecutor(max_workers=max(1, cfg.opt("jobs"))) as pool:
        results = list(pool.map(job, conds))
    rep["modulus_estimates"] = [r.to_dict() for r in results if not isinstance(r, Exception)]
    errors = {c: f"{type(r).__name__}: {r}" for c, r in zip(conds, results) if isinstance(r, Exception)}
    if errors:
        rep["modulus_errors"] = errors
        return EXIT_ERROR, "; ".join(f"{c}: {e}" for c, e in errors.items())
    flagged = [r.condition for r in results if r.flags]
    msg = ", ".join(f"{r.condition}={r.gamma_hat:.6g}" for r in results)
    if flagged:
        msg += f" (flags on {','.join(flagged)})"
    return EXIT_PASS, msg


def cmd_counterexample(cfg: RunConfig, rep: dict) -> tuple:
    v_grid = cfg.opt("v_grid")
    if v_grid < 2:
        raise UsageError("--v-grid must be at least 2")
    audit = run_audit(v_grid)
    rep["audit"] = audit.to_dict()
    if audit.reproduced:
        v = audit.violation.known
        return EXIT_PASS, (f"refutation reproduced: all hypotheses hold and "
                           f"g({v.mid:g}) exceeds max(g({v.u1:g}), g({v.u2:g})) by {v.violation:g}")
    failed = [h.name for h in audit.hypotheses if not h.passed]
    return EXIT_FALSIFIED, f"refutation not reproduced; failing hypotheses: {failed}"


def cmd_construction(cfg: RunConfig, rep: dict) -> tuple:
    f = load_function(cfg)
    rep["function"] = _function_info(f)
    x, y = _vec(cfg.opt("x"), f, "x"), _vec(cfg.opt("y"), f, "y")
    t, gamma, tol = cfg.opt("t"), cfg.opt("gamma"), cfg.opt("tol")
    if not 0 < t < 1:
        raise UsageError("--t must lie strictly between 0 and 1")
    if any(n < 1 for n in cfg.opt("n_list")):
        raise UsageError("--n-list entries must be positive")
    q = C.SegmentQuery(x, y, t)
    traces = []
    rep["traces"] = []
    for n in cfg.opt("n_list"):
        trace, verdict = partition_chain(f, q, gamma, n, tol)
        traces.append(trace)
        rep["traces"].append(dict(trace.to_dict(), verdict=verdict.to_dict()))
    saks = saks_inequality_check(f, x, y, t, gamma, tol)
    rep["saks"] = saks.to_dict()
    rep["_csv"] = _traces_csv(traces)
    failed = [tr["n"] for tr in rep["traces"] if not tr["verdict"]["passed"]]
    if failed or not saks.passed:
        return EXIT_FALSIFIED, f"construction checks failed for n={failed}, saks passed={saks.passed}"
    return EXIT_PASS, f"chain, step and aggregate bounds hold for n={list(cfg.opt('n_list'))}"


def _traces_csv(traces) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for k, tr in enumerate(traces):
        rows = list(csv.reader(io.StringIO(tr.to_csv())))
        if k == 0:
            w.writerow(["n"] + rows[0])
        for r in rows[1:]:
            w.writerow([tr.n] + r)
    return buf.getvalue()


def cmd_minimize(cfg: RunConfig, rep: dict) -> tuple:
    f = load_function(cfg)
    rep["function"] = _function_info(f)
    x, y = _vec(cfg.opt("x"), f, "x"), _vec(cfg.opt("y"), f, "y")
    if np.array_equal(x, y):
        raise UsageError("--x and --y must differ")
    f.domain.contains(x)
    seg = fm.SegmentRestriction(f, x, y)
    fm.evaluate_many(f, np.stack([x, y]))  # raises OutOfDomain early
    width = cfg.opt("target_width")
    try:
        res = minimize_segment(seg, width, cfg.opt("max_eval"), cfg.opt("validate"),
                               cfg.opt("probes"), cfg.opt("tol"))
    except NotUnimodal as exc:
        v = exc.verdict
        rep["minimization"] = {"not_unimodal": {"witness": list(v.witness), "excess": v.excess,
                                                "probes": v.probes}}
        return EXIT_FALSIFIED, (f"NotUnimodal: g({v.witness[1]:g}) exceeds max(g({v.witness[0]:g}), "
                                f"g({v.witness[2]:g})) by {v.excess:.6g}")
    gamma = cfg.opt("gamma")
    if gamma is not None:
        res = growth_diagnostics(res, gamma)
    rep["minimization"] = dict(res.to_dict(), replay_ok=replay(res),
                               evaluation_bound=evaluation_bound(width))
    if gamma is not None and res.gamma_too_large:
        return EXIT_FALSIFIED, f"growth diagnostics: gamma={gamma:g} is too large for this segment"
    note = " (budget exhausted)" if res.budget_exhausted else ""
    return EXIT_PASS, f"minimizer in s in [{res.lower:.9g}, {res.upper:.9g}], candidate {res.candidate:.9g}{note}"


def cmd_catalog(cfg: RunConfig, rep: dict) -> tuple:
    rep["catalog"] = [_function_info(f) for f in fm.catalog()]
    return EXIT_PASS, f"{len(rep['catalog'])} entries"


HANDLERS = {
    "check": cmd_check,
    "estimate": cmd_estimate,
    "counterexample": cmd_counterexample,
    "construction": cmd_construction,
    "minimize": cmd_minimize,
    "catalog": cmd_catalog,
}


@dataclass
class Outcome:
    code: int
    report: Optional[dict]
    out: Optional[str] = None
    format: str = "text"


def run(argv=None, environ=os.environ) -> Outcome:
    """Parse ``argv`` and run the command without writing any output.

    ``report`` is None only when the arguments could not be parsed.
    """
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return Outcome(int(exc.code or 0), None)
    except (UsageError, OSError) as exc:
        print(f"sqc: error: {exc}", file=sys.stderr)
        return Outcome(EXIT_ERROR, None)
    rep = R.new_report(args.command, {})
    try:
        cfg = RunConfig.from_args(args, environ)
        rep["config"] = cfg.to_dict()
        code, why = HANDLERS[args.command](cfg, rep)
    except (UsageError, SqcError, ValueError) as exc:
        code, why = EXIT_ERROR, f"{type(exc).__name__}: {exc}"
    rep["exit_status"] = {"code": code, "rationale": why}
    return Outcome(code, rep, args.out, args.format)


def render(rep: dict, fmt: str) -> str:
    csv_text = rep.pop("_csv", None)
    if fmt == "csv":
        if csv_text is None:
            raise UsageError("--format csv is only available for construction traces")
        return csv_text
    if fmt == "json":
        return R.to_json(rep)
    return R.to_text(rep)


def main(argv=None) -> int:
    res = run(argv)
    if res.report is None:
        return res.code
    try:
        text = render(res.report, res.format)
        if res.out:
            with open(res.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (UsageError, OSError) as exc:
        print(f"sqc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if res.out or res.format != "text":
        print(f"exit {res.code}: {res.report['exit_status']['rationale']}", file=sys.stderr)
    return res.code


if __name__ == "__main__":
    sys.exit(main())
