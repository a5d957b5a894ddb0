"""Command-line front end.

Exit codes: 0 success, 1 mismatch (repro) or refused certificate, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import repro
from .design import Design, DesignError, srs_design
from .estimator import (
    ConstantWeights,
    EstimatorError,
    LinearEstimator,
    VariableWeights,
    build_hte,
    build_iwe,
    build_lexicographic,
    build_multiplicity,
    ht_type_weights,
    lexicographic_order,
)
from .graph import BipartiteGraph, GraphError
from .io import FORMAT, dump_estimator, fmt, format_linear, load_design, load_estimator, load_graph, parse_rational
from .moments import moment_report
from .raoblackwell import rao_blackwellize, zrb
from .spectra import NotUnbiasedError, classify, sample_space_matrix


class InputError(Exception):
    pass


def _parse_y(text: str | None, units) -> tuple[Fraction, ...]:
    if text is None:
        raise InputError("--y is required")
    values = [parse_rational(v) for v in text.split(",")]
    if len(values) != len(units):
        raise InputError(f"--y has {len(values)} values, graph has {len(units)} study units")
    return tuple(values)


def _graph(args) -> BipartiteGraph:
    if not args.graph:
        raise InputError("--graph is required")
    return load_graph(args.graph)


def _design(args, graph: BipartiteGraph | None) -> Design:
    spec = args.design
    if not spec:
        raise InputError("--design is required")
    if spec.startswith("srs:"):
        parts = spec.split(":")
        n = int(parts[1])
        if len(parts) == 3:
            units = [f"i{m}" for m in range(1, int(parts[2]) + 1)]
        elif graph is not None:
            units = list(graph.sampling_units)
        else:
            raise InputError("srs:<n> needs --graph, or use srs:<n>:<N>")
        return srs_design(units, n)
    return load_design(spec, graph.sampling_units if graph is not None else None)


def _weights(path: str, design: Design):
    data = json.loads(Path(path).read_text())["weights"]
    if all(len(e) == 3 for e in data):
        return ConstantWeights({(i, k): parse_rational(w) for i, k, w in data})
    W = {}
    for s, i, k, w in data:
        W[(frozenset(u for u in s.split(",") if u), i, k)] = parse_rational(w)
    return VariableWeights(W)


def build_estimator(spec: str, design: Design, graph: BipartiteGraph) -> LinearEstimator:
    """hte | multiplicity | ht-type | zero | iwe:<file> | lex:forward|reverse|<positions> | dump:<file>"""
    if spec == "zero":
        return LinearEstimator.zero(design, graph.study_units)
    if spec == "hte":
        cov = design.covers(graph)
        if not cov:
            raise InputError(f"design does not cover study units {list(cov.uncovered)}")
        return build_hte(design, graph)
    if spec == "multiplicity":
        return build_multiplicity(design, graph)
    if spec == "ht-type":
        return build_iwe(design, graph, ht_type_weights(design, graph), label="ht-type")
    if spec.startswith("iwe:"):
        return build_iwe(design, graph, _weights(spec[4:], design), label=Path(spec[4:]).stem)
    if spec.startswith("lex:"):
        arg = spec[4:]
        if arg in ("forward", "reverse"):
            order = lexicographic_order(design, reverse=arg == "reverse")
        else:
            forward = lexicographic_order(design)
            try:
                order = [forward[int(n) - 1] for n in arg.split(",")]
            except (ValueError, IndexError):
                raise InputError(f"bad lexicographic order {arg!r}") from None
        return build_lexicographic(design, graph, order, label=spec)
    path = spec[5:] if spec.startswith("dump:") else spec
    if Path(path).exists():
        est = load_estimator(json.loads(Path(path).read_text()), design)
        if est.study_units != graph.study_units:
            raise InputError("dumped estimator columns do not match the graph")
        return est
    raise InputError(f"unknown estimator spec {spec!r}")


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps({"format": FORMAT, **payload}, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def _table(rows: list[tuple[str, str]]) -> list[str]:
    width = max((len(a) for a, _ in rows), default=0)
    return [f"{a:<{width}}  {b}" for a, b in rows]


def _setup(args):
    graph = _graph(args)
    design = _design(args, graph)
    est = build_estimator(args.estimator, design, graph)
    return graph, design, est


def cmd_eval(args) -> int:
    graph, design, est = _setup(args)
    y = _parse_y(args.y, graph.study_units)
    values = est.values(y)
    rows = [(design.sample_label(s), fmt(v)) for s, v in zip(design.support, values)]
    _emit(args, {"estimator": est.label, "values": dict(rows)}, _table(rows))
    return 0


def cmd_moments(args) -> int:
    graph, design, est = _setup(args)
    y = _parse_y(args.y, graph.study_units)
    rep = moment_report(design, est, y)
    fields = {
        "expectation": fmt(rep.expectation),
        "variance": fmt(rep.variance),
        "target": fmt(rep.target),
        "bias": fmt(rep.bias),
    }
    _emit(args, {"estimator": est.label, **fields}, _table(list(fields.items())))
    return 0


def _write_dump(args, dump: dict, lines: list[str]) -> None:
    if args.out:
        Path(args.out).write_text(json.dumps(dump, indent=2, sort_keys=True) + "\n")
    if args.json:
        print(json.dumps(dump, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def cmd_rb(args) -> int:
    graph, design, est = _setup(args)
    out = rao_blackwellize(design, graph, est)
    lines = _table([
        (design.sample_label(s), format_linear(r, out.study_units))
        for s, r in zip(out.samples, out.coefficients)
    ])
    _write_dump(args, dump_estimator(design, out), lines)
    return 0


def cmd_zrb(args) -> int:
    graph, design, est = _setup(args)
    out = zrb(design, graph, est)
    if args.pattern is not None:
        pattern = [k for k in args.pattern.split(",") if k]
        unknown = set(pattern) - set(graph.study_units)
        if unknown:
            raise InputError(f"unknown study units in pattern: {sorted(unknown)}")
        branch = out.branch(pattern)
        lines = _table([
            (design.sample_label(s), format_linear(r, branch.study_units))
            for s, r in zip(branch.samples, branch.coefficients)
        ])
        dump = dump_estimator(design, branch)
        dump["zero_pattern"] = [k for k in graph.study_units if k in pattern]
        _write_dump(args, dump, lines)
        return 0
    lines = []
    for z, branch in out.branches().items():
        label = "{" + ",".join(k for k in graph.study_units if k in z) + "}"
        lines.append(f"zero pattern {label}")
        lines += ["  " + line for line in _table([
            (design.sample_label(s), format_linear(r, branch.study_units))
            for s, r in zip(branch.samples, branch.coefficients)
        ])]
    _write_dump(args, dump_estimator(design, out), lines)
    return 0


def cmd_classify(args) -> int:
    graph, design, est = _setup(args)
    builder = None
    if args.estimator in ("hte", "multiplicity", "ht-type") or args.estimator.startswith(("lex:", "iwe:")):
        builder = lambda d, g: build_estimator(args.estimator, d, g)  # noqa: E731
    try:
        result = classify(design, graph, est, builder=builder)
    except NotUnbiasedError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    evidence = {
        k: v for k, v in result.evidence.items() if k != "spanning_coefficients"
    }
    payload = {"estimator": est.label, "verdict": result.verdict.value, "evidence": evidence}
    rows = [("verdict", result.verdict.value)]
    rows += [(k, str(v)) for k, v in evidence.items()]
    if result.witness_y is not None:
        payload["witness_y"] = [fmt(v) for v in result.witness_y]
        payload["variance_gap"] = fmt(result.variance_gap)
        rows.append(("witness_y", ",".join(str(v) for v in result.witness_y)))
        rows.append(("variance_gap", str(result.variance_gap)))
    _emit(args, payload, _table(rows))
    return 0


def cmd_rank(args) -> int:
    graph = load_graph(args.graph) if args.graph else None
    design = _design(args, graph)
    ssm = sample_space_matrix(design)
    n = len(design.support)
    payload = {
        "support": n,
        "rank": ssm.rank,
        "kernel_dimension": len(ssm.kernel_basis),
        "full_rank": ssm.full_rank,
    }
    line = f"rank {ssm.rank} of {n}; full_rank={str(ssm.full_rank).lower()}"
    _emit(args, payload, [line, f"kernel dimension {len(ssm.kernel_basis)}"])
    return 0


def cmd_repro(args) -> int:
    names = list(repro.CASES) if args.case == "all" else [args.case]
    reports = [repro.CASES[n]() for n in names]
    if args.json:
        payload = {
            r.case: {
                "passed": r.passed,
                "cells": [vars(c) for c in r.cells],
            }
            for r in reports
        }
        print(json.dumps({"format": FORMAT, **payload}, indent=2, sort_keys=True))
    else:
        for r in reports:
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.case}: {len(r.cells)} cells")
            for c in r.cells:
                mark = "ok " if c.passed else "BAD"
                print(f"  {mark} {c.name}: {c.computed}")
                if not c.passed:
                    print(f"      expected {c.expected}")
    return 0 if all(r.passed for r in reports) else 1


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="graph fixture file or bundled name (fig1, fig1_trimmed, fig3)")
    common.add_argument("--design", help="design file, bundled name, srs:<n> or srs:<n>:<N>")
    common.add_argument("--estimator", default="hte", help=build_estimator.__doc__)
    common.add_argument("--y", help='study values, e.g. "0,1/2,3"')
    common.add_argument("--json", action="store_true", help="emit JSON instead of text")

    parser = argparse.ArgumentParser(prog="bigs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common]).set_defaults(func=cmd_eval)
    sub.add_parser("moments", parents=[common]).set_defaults(func=cmd_moments)
    p = sub.add_parser("rb", parents=[common])
    p.add_argument("--out")
    p.set_defaults(func=cmd_rb)
    p = sub.add_parser("zrb", parents=[common])
    p.add_argument("--out")
    p.add_argument("--pattern", help="comma-separated zero pattern; prints one branch")
    p.set_defaults(func=cmd_zrb)
    sub.add_parser("classify", parents=[common]).set_defaults(func=cmd_classify)
    sub.add_parser("rank", parents=[common]).set_defaults(func=cmd_rank)
    p = sub.add_parser("repro", parents=[common])
    p.add_argument("case", choices=[*repro.CASES, "all"])
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, GraphError, DesignError, EstimatorError, FileNotFoundError,
            json.JSONDecodeError, KeyError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
