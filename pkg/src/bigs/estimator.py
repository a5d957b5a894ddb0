"""Estimators as exact coefficient tables, and the incidence weighting family.

A :class:`LinearEstimator` stores ``c[s0][k]`` for every support sample and
study unit, so that ``e(s0; y) = sum_k c[s0][k] * y[k]``.  Everything else in
the package (moments, Rao-Blackwellization, the sample-space decomposition)
is a finite exact computation on such tables.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .design import Design, Sample
from .graph import BipartiteGraph, GraphError, KnowledgeLevel, elemental_graph

ZERO = Fraction(0)

#: Zero-invariance is checked over every subset of study units up to this size.
EXHAUSTIVE_LIMIT = 12


class EstimatorError(ValueError):
    """Raised for malformed estimators or evaluation outside their domain."""


def as_vector(y, units: Sequence[str]) -> tuple[Fraction, ...]:
    """Coerce ``y`` (a sequence or a unit-keyed mapping) to a tuple over ``units``."""
    if isinstance(y, Mapping):
        if set(y) != set(units):
            raise EstimatorError(
                f"y keys {sorted(y)} do not match study units {list(units)}"
            )
        values = [y[k] for k in units]
    else:
        values = list(y)
        if len(values) != len(units):
            raise EstimatorError(
                f"y has {len(values)} entries, expected {len(units)}"
            )
    out = []
    for v in values:
        if isinstance(v, float):
            raise EstimatorError(f"floating point value {v!r} is not exact")
        out.append(Fraction(v))
    return tuple(out)


@dataclass(frozen=True)
class LinearEstimator:
    samples: tuple[Sample, ...]
    study_units: tuple[str, ...]
    coefficients: tuple[tuple[Fraction, ...], ...]
    knowledge: KnowledgeLevel = KnowledgeLevel.ANCESTRY
    label: str = ""

    def __post_init__(self) -> None:
        if len(self.coefficients) != len(self.samples):
            raise EstimatorError("one coefficient row per support sample required")
        width = len(self.study_units)
        if any(len(row) != width for row in self.coefficients):
            raise EstimatorError("one coefficient column per study unit required")

    @classmethod
    def from_function(
        cls,
        design: Design,
        units: Sequence[str],
        coef: Callable[[Sample, str], Fraction],
        **kwargs,
    ) -> LinearEstimator:
        rows = tuple(
            tuple(Fraction(coef(s, k)) for k in units) for s in design.support
        )
        return cls(design.support, tuple(units), rows, **kwargs)

    @classmethod
    def zero(cls, design: Design, units: Sequence[str], **kwargs) -> LinearEstimator:
        kwargs.setdefault("label", "zero")
        return cls.from_function(design, units, lambda s, k: ZERO, **kwargs)

    def _row_index(self, s0) -> int:
        try:
            return self.samples.index(frozenset(s0))
        except ValueError:
            raise EstimatorError(f"sample {sorted(s0)} is outside the support") from None

    def row(self, s0) -> tuple[Fraction, ...]:
        return self.coefficients[self._row_index(s0)]

    def column(self, k: str) -> tuple[Fraction, ...]:
        n = self.study_units.index(k)
        return tuple(row[n] for row in self.coefficients)

    def coefficient(self, s0, k: str) -> Fraction:
        return self.row(s0)[self.study_units.index(k)]

    def evaluate(self, s0, y) -> Fraction:
        y = as_vector(y, self.study_units)
        return sum((c * v for c, v in zip(self.row(s0), y)), ZERO)

    def values(self, y) -> tuple[Fraction, ...]:
        """Estimates for every support sample, in support order."""
        y = as_vector(y, self.study_units)
        return tuple(
            sum((c * v for c, v in zip(row, y)), ZERO) for row in self.coefficients
        )

    def is_zero(self) -> bool:
        return all(c == 0 for row in self.coefficients for c in row)

    def observation_violation(self, graph: BipartiteGraph) -> tuple[Sample, str] | None:
        """First (s0, k) with a nonzero coefficient although k is not observed."""
        for s, row in zip(self.samples, self.coefficients):
            seen = set(graph.successors(s))
            for k, c in zip(self.study_units, row):
                if c != 0 and k not in seen:
                    return s, k
        return None

    def drop_units(self, units: Iterable[str]) -> LinearEstimator:
        gone = set(units)
        keep = [n for n, k in enumerate(self.study_units) if k not in gone]
        return LinearEstimator(
            self.samples,
            tuple(self.study_units[n] for n in keep),
            tuple(tuple(row[n] for n in keep) for row in self.coefficients),
            self.knowledge,
            self.label,
        )

    def relabel(self, label: str) -> LinearEstimator:
        return LinearEstimator(
            self.samples, self.study_units, self.coefficients, self.knowledge, label
        )

    def _combine(self, other: LinearEstimator, a: Fraction, b: Fraction) -> LinearEstimator:
        if self.samples != other.samples or self.study_units != other.study_units:
            raise EstimatorError("estimators are defined on different tables")
        rows = tuple(
            tuple(a * x + b * z for x, z in zip(r1, r2))
            for r1, r2 in zip(self.coefficients, other.coefficients)
        )
        return LinearEstimator(
            self.samples,
            self.study_units,
            rows,
            max(self.knowledge, other.knowledge),
        )

    def __add__(self, other: LinearEstimator) -> LinearEstimator:
        return self._combine(other, Fraction(1), Fraction(1))

    def __sub__(self, other: LinearEstimator) -> LinearEstimator:
        return self._combine(other, Fraction(1), Fraction(-1))

    def __rmul__(self, a) -> LinearEstimator:
        a = Fraction(a)
        rows = tuple(tuple(a * c for c in row) for row in self.coefficients)
        return LinearEstimator(self.samples, self.study_units, rows, self.knowledge)

    def __neg__(self) -> LinearEstimator:
        return Fraction(-1) * self


class PiecewiseEstimator:
    """Linear estimators indexed by the zero pattern of ``y``.

    The branch for pattern ``Z`` is a :class:`LinearEstimator` over the study
    units outside ``Z`` and applies whenever ``y`` vanishes exactly on ``Z``.
    Branches are built eagerly for small graphs, otherwise on first use.
    """

    def __init__(
        self,
        samples: tuple[Sample, ...],
        study_units: tuple[str, ...],
        make_branch: Callable[[frozenset[str]], LinearEstimator],
        knowledge: KnowledgeLevel = KnowledgeLevel.SUCCESSOR_ANCESTRY,
        label: str = "",
    ) -> None:
        self.samples = samples
        self.study_units = study_units
        self.knowledge = knowledge
        self.label = label
        self._make_branch = make_branch
        self._branches: dict[frozenset[str], LinearEstimator] = {}
        if len(study_units) <= EXHAUSTIVE_LIMIT:
            for pattern in zero_patterns(study_units):
                self.branch(pattern)

    def branch(self, zero_pattern: Iterable[str]) -> LinearEstimator:
        z = frozenset(zero_pattern)
        if not z <= set(self.study_units):
            raise EstimatorError(f"zero pattern {sorted(z)} names unknown units")
        if z not in self._branches:
            b = self._make_branch(z)
            expected = tuple(k for k in self.study_units if k not in z)
            if b.study_units != expected or b.samples != self.samples:
                raise EstimatorError("branch table does not match its zero pattern")
            self._branches[z] = b
        return self._branches[z]

    def branches(self) -> dict[frozenset[str], LinearEstimator]:
        """All branches, materialising any that are still lazy."""
        return {z: self.branch(z) for z in zero_patterns(self.study_units)}

    def _split(self, y) -> tuple[LinearEstimator, dict[str, Fraction]]:
        y = as_vector(y, self.study_units)
        z = frozenset(k for k, v in zip(self.study_units, y) if v == 0)
        rest = {k: v for k, v in zip(self.study_units, y) if k not in z}
        return self.branch(z), rest

    def branch_for(self, y) -> LinearEstimator:
        return self._split(y)[0]

    def evaluate(self, s0, y) -> Fraction:
        branch, rest = self._split(y)
        return branch.evaluate(s0, rest)

    def values(self, y) -> tuple[Fraction, ...]:
        branch, rest = self._split(y)
        return branch.values(rest)


Estimator = Union[LinearEstimator, PiecewiseEstimator]


def zero_patterns(units: Sequence[str]) -> Iterable[frozenset[str]]:
    """Every subset of ``units``, by size then canonical order."""
    for r in range(len(units) + 1):
        for combo in itertools.combinations(units, r):
            yield frozenset(combo)


# -- weight schemes ---------------------------------------------------------


@dataclass(frozen=True)
class ConstantWeights:
    """One weight per edge, independent of the sample graph."""

    w: Mapping[tuple[str, str], Fraction]

    def get(self, s0: Sample, i: str, k: str) -> Fraction:
        return self.w.get((i, k), ZERO)

    def keys_for_check(self) -> Iterable[tuple[str, str]]:
        return self.w.keys()


@dataclass(frozen=True)
class VariableWeights:
    """Weights ``W[s0][i][k]`` that may vary with the realised sample."""

    W: Mapping[tuple[Sample, str, str], Fraction]

    def get(self, s0: Sample, i: str, k: str) -> Fraction:
        return self.W.get((s0, i, k), ZERO)

    def keys_for_check(self) -> Iterable[tuple[str, str]]:
        return ((i, k) for (_, i, k) in self.W.keys())


WeightScheme = Union[ConstantWeights, VariableWeights]


def _check_weight_edges(graph: BipartiteGraph, weights: WeightScheme) -> None:
    for edge in weights.keys_for_check():
        if edge not in graph.edges:
            raise EstimatorError(f"weight given for non-edge {edge}")
    if isinstance(weights, VariableWeights):
        for s, i, _ in weights.W:
            if i not in s:
                raise EstimatorError(f"variable weight for {i} outside its sample")


def multiplicity_weights(graph: BipartiteGraph) -> ConstantWeights:
    """Equal shares ``1/|beta_k|`` over the ancestors of each study unit."""
    return ConstantWeights(
        {(i, k): Fraction(1, len(graph.beta(k))) for (i, k) in graph.sorted_edges()}
    )


def build_iwe(
    design: Design,
    graph: BipartiteGraph,
    weights: WeightScheme,
    label: str = "iwe",
) -> LinearEstimator:
    """Incidence weighting estimator: sum over sampled edges of W * y_k / pi_i."""
    _check_weight_edges(graph, weights)
    pi = {i: design.unit_inclusion(i) for i in design.units}

    def coef(s: Sample, k: str) -> Fraction:
        return sum(
            (weights.get(s, i, k) / pi[i] for i in graph.beta(k) if i in s), ZERO
        )

    return LinearEstimator.from_function(
        design, graph.study_units, coef, knowledge=KnowledgeLevel.ANCESTRY, label=label
    )


def build_hte(design: Design, graph: BipartiteGraph) -> LinearEstimator:
    """Horvitz-Thompson estimator over the observed study units."""
    pi = {k: design.study_inclusion(graph, k) for k in graph.study_units}
    observed = {s: set(graph.successors(s)) for s in design.support}

    def coef(s: Sample, k: str) -> Fraction:
        return 1 / pi[k] if k in observed[s] else ZERO

    return LinearEstimator.from_function(
        design, graph.study_units, coef, knowledge=KnowledgeLevel.ANCESTRY, label="hte"
    )


def build_multiplicity(design: Design, graph: BipartiteGraph) -> LinearEstimator:
    return build_iwe(design, graph, multiplicity_weights(graph), label="multiplicity")


# -- lexicographic indicator estimators -------------------------------------


def lexicographic_order(design: Design, reverse: bool = False) -> list[Sample]:
    order = sorted(design.support, key=design.sample_key)
    return order[::-1] if reverse else order


def lexicographic_indicator_weights(
    design: Design,
    graph: BipartiteGraph,
    base: ConstantWeights,
    order: Sequence[Iterable[str]],
) -> VariableWeights:
    """Put all of unit i's weight on the first sample in ``order`` containing i.

    ``W[s0][i][k] = w[i][k] * pi_i * I_i(s0) / p(s0)``, which stays unbiased
    whenever the base weights sum to one over each ancestor set.
    """
    order = [frozenset(s) for s in order]
    if sorted(order, key=design.sample_key) != sorted(design.support, key=design.sample_key):
        raise EstimatorError("order must be a permutation of the support")
    for k in graph.study_units:
        total = sum((base.get(frozenset(), i, k) for i in graph.beta(k)), ZERO)
        if total != 1:
            raise EstimatorError(f"base weights for {k} sum to {total}, not 1")
    first: dict[str, Sample] = {}
    for s in order:
        for i in s:
            first.setdefault(i, s)
    W = {}
    for (i, k), w in base.w.items():
        s = first.get(i)
        if s is None or w == 0:
            continue
        W[(s, i, k)] = w * design.unit_inclusion(i) / design.probability(s)
    return VariableWeights(W)


def build_lexicographic(
    design: Design,
    graph: BipartiteGraph,
    order: Sequence[Iterable[str]],
    base: ConstantWeights | None = None,
    label: str = "lex",
) -> LinearEstimator:
    base = multiplicity_weights(graph) if base is None else base
    weights = lexicographic_indicator_weights(design, graph, base, order)
    return build_iwe(design, graph, weights, label=label)


# -- HT-type estimators -----------------------------------------------------


def _ancestor_hits(design: Design, graph: BipartiteGraph, k: str) -> dict[frozenset[str], Fraction]:
    """phi: probability of each nonempty intersection s0 & beta_k."""
    beta = frozenset(graph.beta(k))
    phi: dict[frozenset[str], Fraction] = {}
    for s, p in design.items():
        hit = s & beta
        if hit:
            phi[hit] = phi.get(hit, ZERO) + p
    return phi


def ht_type_weights(
    design: Design,
    graph: BipartiteGraph,
    score: Callable[[str, frozenset[str]], Fraction] | None = None,
) -> VariableWeights:
    """Weights of an HT-type estimator.

    ``score(k, s_k)`` gives a positive relative level for the coefficient of
    ``y_k`` when ``s_k = s0 & beta_k`` is observed; it is rescaled so that
    ``sum phi * eta == pi_(k)`` and split equally over ``s_k``.  The default
    score ``|s_k|**2`` gives non-constant weights on most graphs.
    """
    if score is None:
        score = lambda k, hit: Fraction(len(hit) ** 2)  # noqa: E731
    W = {}
    for k in graph.study_units:
        phi = _ancestor_hits(design, graph, k)
        if not phi:
            continue
        pi_k = sum(phi.values(), ZERO)
        norm = sum((f * Fraction(score(k, hit)) for hit, f in phi.items()), ZERO)
        beta = frozenset(graph.beta(k))
        for s in design.support:
            hit = s & beta
            if not hit:
                continue
            eta = pi_k * Fraction(score(k, hit)) / norm
            for i in hit:
                W[(s, i, k)] = design.unit_inclusion(i) * eta / (pi_k * len(hit))
    return VariableWeights(W)


@dataclass(frozen=True)
class HTTypeReport:
    """Per study unit: ``{s_k: (phi, eta)}`` and whether sum phi*eta == pi_(k)."""

    terms: dict[str, dict[frozenset[str], tuple[Fraction, Fraction]]]
    balanced: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.balanced.values())


def ht_type_report(
    design: Design, graph: BipartiteGraph, weights: WeightScheme
) -> HTTypeReport:
    pi = {i: design.unit_inclusion(i) for i in design.units}
    terms: dict[str, dict[frozenset[str], tuple[Fraction, Fraction]]] = {}
    balanced: dict[str, bool] = {}
    for k in graph.study_units:
        phi = _ancestor_hits(design, graph, k)
        pi_k = design.study_inclusion(graph, k)
        beta = frozenset(graph.beta(k))
        eta: dict[frozenset[str], Fraction] = {}
        consistent = True
        for s in design.support:
            hit = s & beta
            if not hit:
                continue
            value = pi_k * sum((weights.get(s, i, k) / pi[i] for i in hit), ZERO)
            if eta.setdefault(hit, value) != value:
                consistent = False
        terms[k] = {hit: (phi[hit], eta[hit]) for hit in phi}
        total = sum((f * e for f, e in terms[k].values()), ZERO)
        balanced[k] = consistent and total == pi_k
    return HTTypeReport(terms, balanced)


# -- property checks --------------------------------------------------------


@dataclass(frozen=True)
class UnbiasednessCheck:
    """``totals[k]`` is sum over ancestors of E(W_ik | i in s0); unbiased iff all are 1."""

    unbiased: bool
    totals: dict[str, Fraction]

    def __bool__(self) -> bool:
        return self.unbiased


def check_unbiased_weights(
    design: Design, graph: BipartiteGraph, weights: WeightScheme
) -> UnbiasednessCheck:
    totals: dict[str, Fraction] = {}
    for k in graph.study_units:
        total = ZERO
        for i in graph.beta(k):
            if isinstance(weights, ConstantWeights):
                total += weights.get(frozenset(), i, k)
                continue
            pi_i = design.unit_inclusion(i)
            if pi_i == 0:
                raise EstimatorError(f"unit {i} has zero inclusion probability")
            total += sum(
                (p * weights.get(s, i, k) for s, p in design.items() if i in s), ZERO
            ) / pi_i
        totals[k] = total
    return UnbiasednessCheck(all(t == 1 for t in totals.values()), totals)


Builder = Callable[[Design, BipartiteGraph], LinearEstimator]


@dataclass(frozen=True)
class InvarianceCheck:
    ok: bool
    removed: frozenset[str] | None = None
    sample: Sample | None = None
    error: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def _removal_sets(units: Sequence[str]) -> Iterable[frozenset[str]]:
    if len(units) <= EXHAUSTIVE_LIMIT:
        sizes = range(1, len(units) + 1)
    else:
        sizes = range(1, 3)
    for r in sizes:
        for combo in itertools.combinations(units, r):
            yield frozenset(combo)


def check_zero_invariant(
    builder: Builder, design: Design, graph: BipartiteGraph
) -> InvarianceCheck:
    """Compare ``builder`` on each reduced graph with the reduced full table.

    Exhaustive over removal sets for small graphs; singletons and pairs only
    for larger ones.
    """
    full = builder(design, graph)
    for gone in _removal_sets(graph.study_units):
        try:
            reduced = builder(design, graph.remove_units(gone))
        except (ValueError, ZeroDivisionError, GraphError) as exc:
            return InvarianceCheck(False, gone, None, str(exc))
        expected = full.drop_units(gone)
        if reduced.study_units != expected.study_units:
            return InvarianceCheck(False, gone, None, "study units differ")
        for s, r1, r2 in zip(expected.samples, expected.coefficients, reduced.coefficients):
            if r1 != r2:
                return InvarianceCheck(False, gone, s)
    return InvarianceCheck(True)


@dataclass(frozen=True)
class ElementalCheck:
    ok: bool
    unit: str | None = None
    sample: Sample | None = None
    got: Fraction | None = None
    expected: Fraction | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_elemental(builder: Builder, design: Design) -> ElementalCheck:
    """On every single-edge graph (i, k), the coefficient must be 1/pi_i when i is sampled."""
    k = "k*"
    while k in design.units:
        k += "*"
    for i in design.units:
        pi_i = design.unit_inclusion(i)
        est = builder(design, elemental_graph(design.units, i, k))
        for s, row in zip(est.samples, est.coefficients):
            want = 1 / pi_i if i in s else ZERO
            if row[0] != want:
                return ElementalCheck(False, i, s, row[0], want)
    return ElementalCheck(True)
