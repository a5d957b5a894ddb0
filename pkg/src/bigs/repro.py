"""One-shot reproduction of the worked examples, cell by cell in exact arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as Q

from .design import Design, srs_design
from .estimator import LinearEstimator, build_lexicographic, build_multiplicity, lexicographic_order
from .io import format_linear, load_design, load_graph
from .moments import variance
from .raoblackwell import rao_blackwellize, zrb
from .spectra import is_full_rank


@dataclass(frozen=True)
class Cell:
    name: str
    expected: str
    computed: str
    passed: bool


@dataclass
class ReproReport:
    case: str
    cells: list[Cell] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cells)

    def check(self, name: str, expected, computed, render=str) -> None:
        self.cells.append(Cell(name, render(expected), render(computed), expected == computed))


def _row(est: LinearEstimator, design: Design, sample) -> dict[str, Q]:
    row = est.row(sample)
    return {k: c for k, c in zip(est.study_units, row) if c != 0}


def _render(coefs: dict[str, Q]) -> str:
    units = sorted(coefs)
    return format_linear([coefs[k] for k in units], units)


def example2() -> ReproReport:
    rep = ReproReport("example2")
    graph, design = load_graph("fig3"), load_design("example2_design")
    reduced = graph.remove_units(["k1"])
    s1, s2 = frozenset({"i1", "i2"}), frozenset({"i2", "i3"})
    e_full = build_multiplicity(design, graph)
    e_red = build_multiplicity(design, reduced)
    rb_red = rao_blackwellize(design, reduced, e_red)
    rb_full = rao_blackwellize(design, graph, e_full)
    z = zrb(design, graph, e_full).branch({"k1"})

    rep.check("e(s*; B)", {"k1": Q(3), "k2": Q(4, 3)}, _row(e_full, design, s1), _render)
    rep.check("e(s**; B)", {"k2": Q(5, 6)}, _row(e_full, design, s2), _render)
    rep.check("e(s*; B^(k1))", {"k2": Q(4, 3)}, _row(e_red, design, s1), _render)
    rep.check("e(s**; B^(k1))", {"k2": Q(5, 6)}, _row(e_red, design, s2), _render)
    rep.check("e_RB(s*; B^(k1))", {"k2": Q(1)}, _row(rb_red, design, s1), _render)
    rep.check("e_RB(s**; B^(k1))", {"k2": Q(1)}, _row(rb_red, design, s2), _render)
    rep.check("e_RB(.; B) == e(.; B)", e_full.coefficients, rb_full.coefficients,
              lambda rows: " | ".join(format_linear(r, graph.study_units) for r in rows))
    rep.check("ZRB(e) given y_k1 = 0", ({"k2": Q(1)}, {"k2": Q(1)}),
              (_row(z, design, s1), _row(z, design, s2)),
              lambda pair: " | ".join(_render(r) for r in pair))
    return rep


# Table 1 of the worked example, coefficients on k1..k4 for samples 12..34.
_T = {
    "e0": ["3,3,3,0", "0,3,3,0", "3,0,0,6", "0,0,0,0", "0,0,0,0", "0,0,0,0"],
    "e1": ["0,0,0,0", "0,0,0,0", "3,0,0,0", "0,0,0,0", "0,3,3,0", "3,3,3,6"],
    "e2": ["0,0,0,0", "0,0,0,0", "3,0,0,0", "0,0,0,0", "3,3,3,6", "0,3,3,0"],
    "d": ["0,0,0,0", "0,0,0,0", "0,0,0,0", "0,0,0,0", "3,0,0,6", "-3,0,0,-6"],
}


def table1_estimators() -> tuple[Design, dict[str, LinearEstimator]]:
    graph = load_graph("fig1_trimmed")
    design = srs_design(graph.sampling_units, 2)
    forward = lexicographic_order(design)
    # 24 < 34 < 23 < 14 < 13 < 12, as positions in the forward order
    mixed = [forward[n] for n in (4, 5, 3, 2, 1, 0)]
    e0 = build_lexicographic(design, graph, forward, label="e0")
    e1 = build_lexicographic(design, graph, lexicographic_order(design, reverse=True), label="e1")
    e2 = build_lexicographic(design, graph, mixed, label="e2")
    return design, {"e0": e0, "e1": e1, "e2": e2, "d": (e2 - e1).relabel("d")}


def table1() -> ReproReport:
    rep = ReproReport("table1")
    design, ests = table1_estimators()
    units = ("k1", "k2", "k3", "k4")
    for name, cells in _T.items():
        est = ests[name]
        for s, text in zip(design.support, cells):
            expected = tuple(Q(x) for x in text.split(","))
            rep.check(f"{name}({{{design.sample_label(s)}}})", expected, est.row(s),
                      lambda row: format_linear(row, units))
    return rep


def ranks() -> ReproReport:
    rep = ReproReport("ranks")
    rep.check("systematic full rank", True, is_full_rank(load_design("systematic_design")))
    rep.check("minimum support full rank", True, is_full_rank(load_design("minsupport_design")))
    rep.check("SRS n=2 of 4 full rank", False, is_full_rank(srs_design(["i1", "i2", "i3", "i4"], 2)))
    return rep


def variance_chain() -> ReproReport:
    """V(ZRB) < V(RB) <= V(e) on the two-sample example with y_k1 = 0."""
    rep = ReproReport("variance_chain")
    graph, design = load_graph("fig3"), load_design("example2_design")
    e = build_multiplicity(design, graph)
    y = (Q(0), Q(1))
    v_e = variance(design, e, y)
    v_rb = variance(design, rao_blackwellize(design, graph, e), y)
    v_zrb = variance(design, zrb(design, graph, e), y)
    rep.cells.append(Cell("V(ZRB) < V(RB)", "true", f"{v_zrb} < {v_rb}", v_zrb < v_rb))
    rep.cells.append(Cell("V(RB) <= V(e)", "true", f"{v_rb} <= {v_e}", v_rb <= v_e))
    return rep


CASES = {
    "example2": example2,
    "table1": table1,
    "ranks": ranks,
    "variance_chain": variance_chain,
}
