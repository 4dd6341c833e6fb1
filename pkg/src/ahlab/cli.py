"""Command-line front end.

Exit codes: 0 when every asserted check passes, 2 when a contractual check
fails, 1 for usage or input errors.  Informational results (hypothesis-gated
residuals whose hypotheses failed, single-cluster mixed-plane checks) are
marked "info" in text output, recorded in JSON, and never affect the exit
code.

Sample points are drawn from a scrambled Halton sequence over the chart's
domain box, seeded by a hash of the chart's canonical text, so repeated runs
of the same invocation produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace

import numpy as np
from scipy.stats import qmc

from . import analysis, chartfile, expr, geometry, zoo

SUITES = ("universal", "ak2", "cf-ak2", "all")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ahlab",
        description="curvature reports for almost-Hermitian charts")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_chart_args(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--chart", metavar="PATH",
                         help="chart file to analyze")
        src.add_argument("--zoo", metavar="NAME",
                         help="zoo entry to analyze")
        p.add_argument("--param", action="append", default=[],
                       metavar="NAME=VALUE",
                       help="override a chart parameter (repeatable)")
        p.add_argument("--points", type=int, default=5, metavar="N",
                       help="number of sampled points (default 5)")
        p.add_argument("--at", action="append", default=[], metavar="COORDS",
                       help="explicit point x1,..,xn; repeatable, replaces "
                            "sampling")
        p.add_argument("--tol", type=float, default=1e-6,
                       help="residual tolerance (default 1e-6)")
        p.add_argument("--json", metavar="PATH",
                       help="also write a JSON report")

    p = sub.add_parser("classify", help="structure class residuals per point")
    add_chart_args(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("check", help="identity residual suites")
    add_chart_args(p)
    p.add_argument("--suite", choices=SUITES, default="all")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("match", help="match curvature against the "
                                     "classification cases")
    add_chart_args(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("zoo-list", help="list zoo entries")
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_zoo_list)

    p = sub.add_parser("zoo-emit", help="write a zoo entry as a chart file")
    p.add_argument("--zoo", required=True, metavar="NAME")
    p.add_argument("--param", action="append", default=[],
                   metavar="NAME=VALUE")
    p.add_argument("--out", metavar="PATH",
                   help="output path (default: stdout)")
    p.set_defaults(func=cmd_zoo_emit)

    return parser


class UsageError(ValueError):
    pass


def _parse_params(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--param needs NAME=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


def _resolve_chart(args):
    overrides = _parse_params(args.param)
    if args.zoo is not None:
        chart = zoo.get(args.zoo).build(**overrides)
        return chart
    chart = chartfile.load_chart(args.chart)
    if overrides:
        params = dict(chart.params)
        for key, value in overrides.items():
            if key not in params:
                raise UsageError(
                    f"chart file defines no parameter {key!r}")
            params[key] = float(value)
        chart = replace(chart, params=params)
    return chart


def _chart_seed(chart) -> int:
    digest = hashlib.sha256(chartfile.emit_chart(chart).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _sample_points(chart, count: int) -> list:
    sampler = qmc.Halton(d=chart.dim, scramble=True,
                         seed=np.random.default_rng(_chart_seed(chart)))
    unit = sampler.random(count)
    scaled = qmc.scale(unit, chart.domain.lo, chart.domain.hi)
    return [tuple(float(x) for x in row) for row in scaled]


def _points_from_args(args, chart) -> list:
    if args.at:
        points = []
        for text in args.at:
            try:
                p = tuple(float(v) for v in text.split(","))
            except ValueError:
                raise UsageError(f"--at needs comma-separated numbers, "
                                 f"got {text!r}") from None
            if len(p) != chart.dim:
                raise UsageError(
                    f"--at point has {len(p)} coordinates, chart has "
                    f"dimension {chart.dim}")
            points.append(p)
        return points
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    return _sample_points(chart, args.points)


def _chart_label(chart) -> str:
    return chart.name or "unnamed chart"


def _fmt_res(value) -> str:
    return f"{value:.3e}"


_ID_ORDER = (analysis.UNIVERSAL_IDS + analysis.CONDITIONAL_IDS
             + analysis.CHAIN_IDS)


def _ordered(keys):
    known = [k for k in _ID_ORDER if k in keys]
    return known + sorted(set(keys) - set(known))


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _print_header(chart, args, points) -> None:
    print(f"chart: {_chart_label(chart)} (dim {chart.dim})")
    print(f"tolerance: {args.tol:g}")
    origin = "explicit" if args.at else "sampled"
    print(f"points ({origin}):")
    for p in points:
        print("  (" + ", ".join(f"{x:.6g}" for x in p) + ")")


def cmd_classify(args) -> int:
    chart = _resolve_chart(args)
    points = _points_from_args(args, chart)
    reports = analysis.classify(chart, points, args.tol)
    _print_header(chart, args, points)
    for report in reports:
        print(f"point (" + ", ".join(f"{x:.6g}" for x in report.point) + ")")
        doc = report.to_json()
        for key, value in doc["residuals"].items():
            print(f"  {key:15s} {_fmt_res(value)}")
        yes = [k for k, v in report.verdicts.items() if v]
        print("  holds: " + (", ".join(yes) if yes else "nothing"))
    if args.json:
        _write_json(args.json, {
            "command": "classify",
            "chart": _chart_label(chart),
            "dim": chart.dim,
            "tol": args.tol,
            "points": [list(p) for p in points],
            "reports": [r.to_json() for r in reports],
        })
    return 0


def _run_universal(chart, points, tol):
    merged = {}
    for p in points:
        for key, value in analysis.check_universal(chart, p).items():
            merged[key] = max(merged.get(key, 0.0), value)
    failures = [k for k, v in merged.items() if v > tol]
    return merged, failures


def _run_ak2(chart, points, tol):
    reports = [analysis.check_ak2(chart, p, tol) for p in points]
    applicable = all(r.applicable for r in reports)
    hyp = {}
    merged = {}
    for r in reports:
        for key, value in r.hypothesis_residuals.items():
            hyp[key] = max(hyp.get(key, 0.0), value)
        for key, value in r.residuals.items():
            merged[key] = max(merged.get(key, 0.0), value)
    failures = [k for k, v in merged.items() if applicable and v > tol]
    return hyp, applicable, merged, failures


def cmd_check(args) -> int:
    chart = _resolve_chart(args)
    points = _points_from_args(args, chart)
    _print_header(chart, args, points)

    doc = {
        "command": "check",
        "suite": args.suite,
        "chart": _chart_label(chart),
        "dim": chart.dim,
        "tol": args.tol,
        "points": [list(p) for p in points],
    }
    failures = []

    if args.suite in ("universal", "all"):
        merged, failed = _run_universal(chart, points, args.tol)
        failures.extend(failed)
        print("[universal]")
        for key in _ordered(merged):
            status = "FAIL" if key in failed else "PASS"
            print(f"  {key:8s} {_fmt_res(merged[key])}  {status}")
        doc["universal"] = {"residuals": merged, "failed": failed}

    if args.suite in ("ak2", "all"):
        hyp, applicable, merged, failed = _run_ak2(chart, points, args.tol)
        failures.extend(failed)
        gate = "applicable" if applicable else "not applicable (info only)"
        print(f"[ak2] hypotheses "
              + " ".join(f"{k}={_fmt_res(v)}" for k, v in sorted(hyp.items()))
              + f" -> {gate}")
        for key in _ordered(merged):
            if not applicable:
                status = "info"
            else:
                status = "FAIL" if key in failed else "PASS"
            print(f"  {key:8s} {_fmt_res(merged[key])}  {status}")
        doc["ak2"] = {"hypothesis_residuals": hyp, "applicable": applicable,
                      "residuals": merged, "failed": failed}

    if args.suite in ("cf-ak2", "all"):
        report = analysis.check_cf_ak2_chain(chart, points, args.tol)
        gate = "applicable" if report.applicable else "not applicable (info only)"
        print(f"[cf-ak2] hypotheses "
              + " ".join(f"{k}={_fmt_res(v)}"
                         for k, v in sorted(report.hypothesis_residuals.items()))
              + f" -> {gate}")
        for key in _ordered(report.residuals):
            value = report.residuals[key]
            if value is None:
                print(f"  {key:8s} (no content)  info")
                continue
            if not report.asserted.get(key):
                status = "info"
            elif value > args.tol:
                status = "FAIL"
                failures.append(key)
            else:
                status = "PASS"
            print(f"  {key:8s} {_fmt_res(value)}  {status}")
        doc["cf_ak2"] = report.to_json()

    passed = not failures
    print("result:", "PASS" if passed else f"FAIL ({', '.join(failures)})")
    doc["failed"] = failures
    doc["passed"] = passed
    if args.json:
        _write_json(args.json, doc)
    return 0 if passed else 2


def cmd_match(args) -> int:
    if args.zoo in zoo.SYNTHETIC_NAMES:
        return _match_synthetic(args)
    chart = _resolve_chart(args)
    points = _points_from_args(args, chart)
    summary = analysis.summarize_chart(chart, points, args.tol)
    match = analysis.theorem_case_match(summary)
    _print_header(chart, args, points)
    clusters = ", ".join(f"{v:+.6g} (x{m})" for v, m in summary.clusters)
    print(f"ricci clusters: {clusters}")
    print(f"conformally flat: {'yes' if summary.conformally_flat else 'no'}; "
          f"almost-Kahler class 2: {'yes' if summary.ak2 else 'no'}")
    print(f"case: {match.case}"
          + ("" if match.consistent else "  (INCONSISTENT with the hypotheses)"))
    if match.constant is not None:
        print(f"constant: {match.constant:.6g}")
    reason = match.diagnostics.get("reason")
    if reason:
        print(f"note: {reason}")
    if args.json:
        _write_json(args.json, {
            "command": "match",
            "chart": _chart_label(chart),
            "dim": chart.dim,
            "tol": args.tol,
            "points": [list(p) for p in points],
            "summary": summary.to_json(),
            "match": match.to_json(),
        })
    return 0


def _match_synthetic(args) -> int:
    synth = zoo.build_synthetic(args.zoo, **_parse_params(args.param))
    summary = analysis.summarize_synthetic(synth, args.tol)
    match = analysis.theorem_case_match(summary)
    print(f"profile: {synth.describe()} (dim {synth.dim})")
    print(f"tolerance: {args.tol:g}")
    print("points: model point with its orthonormal frame")
    clusters = ", ".join(f"{v:+.6g} (x{m})" for v, m in summary.clusters)
    print(f"ricci clusters: {clusters}")
    print(f"conformally flat: {'yes' if summary.conformally_flat else 'no'}; "
          f"almost-Kahler class 2: "
          f"{summary.diagnostics.get('ak_hypothesis', 'assumed')}")
    print(f"case: {match.case}"
          + ("" if match.consistent else "  (INCONSISTENT with the hypotheses)"))
    if match.constant is not None:
        print(f"constant: {match.constant:.6g}")
    reason = match.diagnostics.get("reason")
    if reason:
        print(f"note: {reason}")
    if args.json:
        _write_json(args.json, {
            "command": "match",
            "chart": synth.describe(),
            "dim": synth.dim,
            "tol": args.tol,
            "points": [],
            "summary": summary.to_json(),
            "match": match.to_json(),
        })
    return 0


def cmd_zoo_list(args) -> int:
    for entry in zoo.entries():
        params = ", ".join(f"{k}={v}" for k, v in entry.params) or "none"
        print(f"{entry.name}")
        print(f"  {entry.summary}")
        print(f"  params: {params}")
        expected = ", ".join(f"{k}={v}" for k, v in entry.expected.items())
        print(f"  expects: {expected}")
        print(f"  provenance: {entry.provenance}")
    print("synthetic profiles (match only):")
    print("  space_form  params: dim=6, kappa=-1.0")
    print("  synthetic_product  params: dims=4,2, curvs=-1,1")
    if args.json:
        _write_json(args.json, {
            "command": "zoo-list",
            "entries": [{
                "name": e.name,
                "summary": e.summary,
                "params": {k: v for k, v in e.params},
                "expected": {k: (list(v) if isinstance(v, tuple) else v)
                             for k, v in e.expected.items()},
                "provenance": e.provenance,
            } for e in zoo.entries()],
        })
    return 0


def cmd_zoo_emit(args) -> int:
    entry = zoo.get(args.zoo)
    chart = entry.build(**_parse_params(args.param))
    text = chartfile.emit_chart(chart)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


_INPUT_ERRORS = (UsageError, chartfile.ChartFileError, zoo.ZooError,
                 geometry.GeometryError, analysis.AnalysisError,
                 expr.ExprError, OSError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except _INPUT_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
