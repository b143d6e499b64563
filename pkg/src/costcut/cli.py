"""``costcut`` command line.

Exit codes: 0 success, 1 computational failure (bad data, non-convergence,
undefined metric), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import modelfile, reproduce
from .decision import PolicyError, high_risk_mask, make_policy
from .encoding import EncodingError, default_plan, build_design, encode_terms, load_plan
from .evaluation import MetricError, confusion, evaluate, format_report, sweep
from .glm import FitError, FitOptions, fit as fit_model, log_odds, probability, wald_p_values
from .modelfile import ModelFileError
from .selection import SelectionConfig, SelectionError, stepwise
from .tabular import (ColumnSpec, DataError, format_value, load_table, synth_rare_event,
                      write_rows, write_table)

DELIMITERS = {"comma": ",", "tab": "\t"}
FAILURES = (DataError, EncodingError, FitError, MetricError, PolicyError, SelectionError,
            ModelFileError, OSError)


class ComputationFailed(Exception):
    """Work finished but the result is not usable (e.g. no convergence)."""


def _num(x: float) -> str:
    return format(float(x), ".10g")


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit(text: str, path) -> None:
    stream, close = _open_out(path)
    try:
        stream.write(text if text.endswith("\n") else text + "\n")
    finally:
        if close:
            stream.close()


def _policy(args, parser):
    ratio = args.cost_ratio
    fn, fp = args.cost_fn, args.cost_fp
    if ratio is not None and (fn is not None or fp is not None):
        parser.error("use either --cost-ratio or --cost-fn/--cost-fp, not both")
    if ratio is not None:
        return make_policy(ratio, 1.0)
    if fn is None or fp is None:
        parser.error("a cost policy is required: --cost-ratio R or --cost-fn A --cost-fp B")
    return make_policy(fn, fp)


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


# ---------------------------------------------------------------- commands

def cmd_fit(args, parser) -> int:
    delim = DELIMITERS[args.delimiter]
    data = load_table(args.data, args.outcome, delimiter=delim)
    plan = load_plan(args.plan) if args.plan else default_plan(data)
    design = build_design(data, plan)
    options = FitOptions(max_iterations=args.max_iter, ridge=args.ridge)
    trace = None
    if args.stepwise == "none":
        result = fit_model(design, data.y, options)
    else:
        alpha_in = args.alpha if args.alpha is not None else 0.10
        alpha_out = args.alpha_out if args.alpha_out is not None else alpha_in
        config = SelectionConfig(direction=args.direction,
                                 criterion="aic" if args.stepwise == "aic" else "p_value",
                                 alpha_in=alpha_in, alpha_out=alpha_out,
                                 candidate_granularity=args.granularity)
        result, trace = stepwise(design, data.y, config, options)

    modelfile.save(result, args.out)
    if trace is not None:
        trace_path = args.trace or f"{args.out}.trace.jsonl"
        Path(trace_path).write_text("\n".join(trace.to_lines()) + "\n", encoding="utf-8")

    try:
        pvals = list(wald_p_values(result))
    except FitError:
        pvals = [float("nan")] * result.n_params
    if args.format == "machine":
        doc = {"format": "costcut-fit", "version": 1, "n_obs": result.n_obs,
               "log_likelihood": result.log_likelihood, "aic": result.aic,
               "converged": result.converged, "iterations": result.iterations,
               "warnings": list(result.warnings),
               "coefficients": [{"column": n, "coefficient": float(b), "std_error": float(s),
                                 "p_value": float(p)}
                                for n, b, s, p in zip(result.names, result.coefficients,
                                                      result.std_errors, pvals)]}
        if trace is not None:
            doc["steps"] = len(trace.steps)
        print(json.dumps(doc, indent=2))
    else:
        width = max(len(n) for n in result.names)
        print(f"observations     {result.n_obs}")
        print(f"log-likelihood   {result.log_likelihood:.6f}")
        print(f"AIC              {result.aic:.6f}")
        print(f"iterations       {result.iterations} "
              f"({'converged' if result.converged else 'NOT converged'})")
        if trace is not None:
            print(f"selection steps  {len(trace.steps)}")
        print()
        print(f"{'column':<{width}}  {'coefficient':>12}  {'std.err':>10}  {'p-value':>8}")
        for n, b, s, p in zip(result.names, result.coefficients, result.std_errors, pvals):
            print(f"{n:<{width}}  {b:>12.6f}  {s:>10.6f}  {p:>8.4f}")
        for w in result.warnings:
            print(f"warning: {w}")
    if not result.converged:
        raise ComputationFailed("fit did not converge: " + "; ".join(result.warnings))
    return 0


def _categorical_hints(model, header_names):
    hints = {}
    stack = list(model.terms)
    while stack:
        cur = stack.pop()
        if cur.kind == "interaction":
            stack.extend(cur.parents)
        elif cur.kind == "level" and cur.source in header_names:
            hints[cur.source] = "categorical"
    return hints


def _header(path, delimiter):
    text = Path(path).read_text(encoding="utf-8")
    for line in text.splitlines():
        if not line.startswith("#"):
            return [h.strip() for h in line.split(delimiter)]
    return []


def cmd_predict(args, parser) -> int:
    delim = DELIMITERS[args.delimiter]
    model = modelfile.load(args.model)
    hints = _categorical_hints(model, _header(args.data, delim))
    data = load_table(args.data, None, schema_hints=hints, delimiter=delim, allow_empty=True)
    design = encode_terms(data, model.terms)
    eta = np.atleast_1d(np.asarray(log_odds(model, design.values))) if data.n else np.empty(0)
    prob = np.atleast_1d(np.asarray(probability(eta))) if data.n else np.empty(0)
    cols = [data.column(n) for n in data.names]
    rows = ([format_value(c[i]) for c in cols] + [_num(eta[i]), _num(prob[i])]
            for i in range(data.n))
    stream, close = _open_out(args.out)
    try:
        write_rows(stream, data.names + ["log_odds", "probability"], rows, delim)
    finally:
        if close:
            stream.close()
    return 0


def _scores(args, outcome):
    delim = DELIMITERS[args.delimiter]
    data = load_table(args.data, outcome, delimiter=delim, allow_empty=outcome is None)
    if args.prob_column not in data.names:
        raise DataError(f"probability column {args.prob_column!r} not found")
    return data, data.column(args.prob_column)


def cmd_decide(args, parser) -> int:
    policy = _policy(args, parser)
    data, p = _scores(args, None)
    mask = high_risk_mask(p, policy)
    cols = [data.column(n) for n in data.names]
    rows = ([format_value(c[i]) for c in cols] + ["high" if mask[i] else "low"]
            for i in range(data.n))
    stream, close = _open_out(args.out)
    try:
        write_rows(stream, data.names + ["decision"], rows, DELIMITERS[args.delimiter])
    finally:
        if close:
            stream.close()
    return 0


def cmd_evaluate(args, parser) -> int:
    policy = _policy(args, parser)
    data, p = _scores(args, args.outcome)
    report = evaluate(confusion(data.y, high_risk_mask(p, policy)), policy)
    if args.format == "machine":
        _emit(json.dumps(report.as_dict(), indent=2), args.out)
    else:
        _emit(format_report(report), args.out)
    return 0


def cmd_sweep(args, parser) -> int:
    if not args.ratios:
        parser.error("--ratios needs at least one value")
    data, p = _scores(args, args.outcome)
    table = sweep(p, data.y, args.ratios)
    rows = ([_num(r.ratio), _num(r.cutpoint), str(r.confusion.tp), str(r.confusion.fp),
             str(r.confusion.fn), str(r.confusion.tn), _num(r.total_cost),
             "" if r.saving is None else _num(r.saving)] for r in table)
    stream, close = _open_out(args.out)
    try:
        write_rows(stream, ["ratio", "cutpoint", "tp", "fp", "fn", "tn", "total_cost",
                            "saving_vs_all_negative"], rows, DELIMITERS[args.delimiter])
    finally:
        if close:
            stream.close()
    return 0


def cmd_paper_check(args, parser) -> int:
    checks = reproduce.run_checks()
    if args.format == "machine":
        doc = {"format": "costcut-paper-check", "version": 1,
               "passed": reproduce.all_passed(checks),
               "checks": [{"name": c.name, "computed": c.computed, "published": c.published,
                           "tolerance": c.tolerance, "status": c.status, "note": c.note}
                          for c in checks]}
        _emit(json.dumps(doc, indent=2), args.out)
    else:
        _emit(reproduce.format_checks(checks), args.out)
    return 0 if reproduce.all_passed(checks) else 1


def _feature_specs(text: str) -> list[ColumnSpec]:
    specs = []
    for item in (t.strip() for t in text.split(",") if t.strip()):
        name, _, kind = item.partition(":")
        specs.append(ColumnSpec(name.strip(), (kind or "continuous").strip()))
    return specs


def cmd_synth(args, parser) -> int:
    if args.n < 1:
        parser.error("--n must be at least 1")
    try:
        features = _feature_specs(args.features or "")
    except DataError as exc:
        parser.error(str(exc))
    data = synth_rare_event(args.n, args.coefficients, features, args.seed, args.outcome)
    if args.out is None or args.out == "-":
        write_table(data, sys.stdout, DELIMITERS[args.delimiter])
    else:
        write_table(data, args.out, DELIMITERS[args.delimiter])
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="costcut",
        description="Cost-based probability cutpoints, logistic regression and cost audits.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        if data:
            p.add_argument("--data", required=True, help="input table")
        p.add_argument("--delimiter", choices=sorted(DELIMITERS), default="comma")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=["text", "machine"], default="text")

    def policy(p):
        p.add_argument("--cost-ratio", type=float, help="FN cost in units of one FP")
        p.add_argument("--cost-fn", type=float, help="cost of a false negative")
        p.add_argument("--cost-fp", type=float, help="cost of a false positive")

    p = sub.add_parser("fit", help="fit a logistic model, optionally with stepwise selection")
    common(p)
    p.add_argument("--outcome", required=True)
    p.add_argument("--plan", help="encoding plan file (default: every column raw)")
    p.add_argument("--stepwise", choices=["aic", "pvalue", "none"], default="none")
    p.add_argument("--direction", choices=["forward", "backward", "bidirectional"],
                   default="bidirectional")
    p.add_argument("--granularity", choices=["single_column", "variable_group"],
                   default="single_column")
    p.add_argument("--alpha", type=float, help="inclusion p-value for --stepwise pvalue (0.10)")
    p.add_argument("--alpha-out", type=float, help="removal p-value (default: --alpha)")
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--max-iter", type=_positive_int, default=50)
    p.add_argument("--trace", help="selection trace path (default: <out>.trace.jsonl)")
    p.set_defaults(func=cmd_fit, needs_out=True)

    p = sub.add_parser("predict", help="append log-odds and probabilities to a table")
    common(p)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_predict)

    for name, func, help_ in (("decide", cmd_decide, "classify rows by minimum expected cost"),
                              ("evaluate", cmd_evaluate, "cost report for scored, labelled rows")):
        p = sub.add_parser(name, help=help_)
        common(p)
        policy(p)
        p.add_argument("--prob-column", default="probability")
        if name == "evaluate":
            p.add_argument("--outcome", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="total cost across a list of cost ratios")
    common(p)
    p.add_argument("--outcome", required=True)
    p.add_argument("--prob-column", default="probability")
    p.add_argument("--ratios", type=_float_list, required=True, help="e.g. 10,15,100")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("paper-check", help="recompute the published comparison figures")
    common(p, data=False)
    p.set_defaults(func=cmd_paper_check)

    p = sub.add_parser("synth", help="generate a synthetic logistic dataset")
    common(p, data=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--coefficients", type=_float_list, required=True,
                   help="intercept then one per feature; write --coefficients=-4.5,1")
    p.add_argument("--features", default="", help="e.g. x1:continuous,age:ordinal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outcome", default="y")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "needs_out", False) and not args.out:
        parser.error(f"{args.command} requires --out")
    try:
        return args.func(args, parser)
    except ComputationFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FAILURES as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
