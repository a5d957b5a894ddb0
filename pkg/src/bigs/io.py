"""JSON fixtures and estimator dumps."""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .design import Design, as_fraction
from .estimator import LinearEstimator, PiecewiseEstimator
from .graph import BipartiteGraph, KnowledgeLevel

FORMAT = 1

BUNDLED = ("fig1", "fig1_trimmed", "fig3", "example2_design", "systematic_design", "minsupport_design")


def fmt(x: Fraction) -> str:
    """Canonical ``num/den`` rendering, den > 0."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text) -> Fraction:
    return as_fraction(text.strip() if isinstance(text, str) else text)


def _read(name_or_path: str | Path) -> dict:
    path = Path(name_or_path)
    if path.exists():
        return json.loads(path.read_text())
    name = str(name_or_path).removesuffix(".json")
    if name in BUNDLED:
        text = resources.files("bigs.fixtures").joinpath(f"{name}.json").read_text()
        return json.loads(text)
    raise FileNotFoundError(f"no fixture file or bundled fixture named {name_or_path!r}")


def load_graph(name_or_path: str | Path) -> BipartiteGraph:
    return BipartiteGraph.from_dict(_read(name_or_path))


def load_design(name_or_path: str | Path, units=None) -> Design:
    return Design.from_dict(_read(name_or_path), units)


def sample_key(design: Design, s0) -> str:
    return design.sample_label(frozenset(s0))


def _rows(design: Design, est: LinearEstimator) -> dict:
    return {
        sample_key(design, s): {k: fmt(c) for k, c in zip(est.study_units, row)}
        for s, row in zip(est.samples, est.coefficients)
    }


def dump_estimator(design: Design, est: LinearEstimator | PiecewiseEstimator) -> dict:
    out = {
        "format": FORMAT,
        "label": est.label,
        "knowledge": est.knowledge.label,
    }
    if isinstance(est, PiecewiseEstimator):
        out["study_units"] = list(est.study_units)
        out["branches"] = {
            ",".join(k for k in est.study_units if k in z): _rows(design, b)
            for z, b in est.branches().items()
        }
    else:
        out["study_units"] = list(est.study_units)
        out["rows"] = _rows(design, est)
    return out


def _sample_from_key(key: str) -> frozenset[str]:
    return frozenset(u for u in key.split(",") if u)


def load_estimator(data: dict, design: Design) -> LinearEstimator:
    if "rows" not in data:
        raise ValueError("only linear estimator dumps can be loaded")
    rows = {_sample_from_key(key): row for key, row in data["rows"].items()}
    units = data.get("study_units") or list(next(iter(data["rows"].values())))
    coef = []
    for s in design.support:
        if s not in rows:
            raise ValueError(f"dump has no row for sample {design.sample_label(s)}")
        coef.append(tuple(parse_rational(rows[s].get(k, "0")) for k in units))
    if len(rows) != len(design.support):
        raise ValueError("dump has rows for samples outside the support")
    return LinearEstimator(
        design.support,
        tuple(units),
        tuple(coef),
        KnowledgeLevel.parse(data.get("knowledge", "Ancestry")),
        data.get("label", ""),
    )


def format_linear(coefs, units) -> str:
    """Render a coefficient row as ``3*k1 + 4/3*k2``."""
    terms = []
    for c, k in zip(coefs, units):
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = k if mag == 1 else f"{mag}*{k}"
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        text += f" {sign} {body}"
    return text
