"""Sample-space matrices, the p-orthogonal decomposition and admissibility verdicts."""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .design import Design
from .estimator import Builder, LinearEstimator, check_zero_invariant
from .graph import BipartiteGraph
from .moments import covariance_form, expectation, variance
from .raoblackwell import is_sufficient

ZERO = Fraction(0)


@dataclass(frozen=True)
class SampleSpaceMatrix:
    """Unit-by-sample incidence matrix and its probability-weighted companion."""

    units: tuple[str, ...]
    plain: tuple[tuple[Fraction, ...], ...]
    weighted: tuple[tuple[Fraction, ...], ...]
    rank: int
    kernel_basis: tuple[tuple[Fraction, ...], ...]
    row_basis: tuple[tuple[Fraction, ...], ...]

    @property
    def n_samples(self) -> int:
        return len(self.plain[0]) if self.plain else 0

    @property
    def full_rank(self) -> bool:
        return self.rank == self.n_samples


def sample_space_matrix(design: Design) -> SampleSpaceMatrix:
    plain = tuple(
        tuple(Fraction(int(i in s)) for s in design.support) for i in design.units
    )
    weighted = tuple(
        tuple(p * x for p, x in zip(design.probabilities, row)) for row in plain
    )
    n = len(design.support)
    return SampleSpaceMatrix(
        units=design.units,
        plain=plain,
        weighted=weighted,
        rank=linalg.rank(plain),
        kernel_basis=tuple(tuple(v) for v in linalg.nullspace(weighted, n)),
        row_basis=tuple(tuple(v) for v in linalg.row_basis(plain)),
    )


def p_inner(v: Sequence, w: Sequence, design: Design) -> Fraction:
    if not len(v) == len(w) == len(design.probabilities):
        raise ValueError("vectors must have one entry per support sample")
    return sum(
        (p * Fraction(a) * Fraction(b) for p, a, b in zip(design.probabilities, v, w)),
        ZERO,
    )


def is_full_rank(design: Design) -> bool:
    return sample_space_matrix(design).full_rank


def _project(design: Design, basis, v) -> list[Fraction]:
    """p-orthogonal projection of ``v`` onto span(basis)."""
    if not basis:
        return [ZERO] * len(v)
    gram = [[p_inner(a, b, design) for b in basis] for a in basis]
    rhs = [p_inner(a, v, design) for a in basis]
    coef = linalg.solve(gram, rhs)
    assert coef is not None
    return [sum((c * b[n] for c, b in zip(coef, basis)), ZERO) for n in range(len(v))]


def _from_columns(est: LinearEstimator, columns, label: str) -> LinearEstimator:
    rows = tuple(tuple(col[n] for col in columns) for n in range(len(est.samples)))
    return LinearEstimator(est.samples, est.study_units, rows, est.knowledge, label)


def decompose(
    design: Design, est: LinearEstimator
) -> tuple[LinearEstimator, LinearEstimator]:
    """Split each column into Row(S) and Ker(S~) parts; the split is p-orthogonal."""
    ssm = sample_space_matrix(design)
    row_cols, ker_cols = [], []
    for k in est.study_units:
        v = est.column(k)
        r = _project(design, ssm.row_basis, v)
        kpart = [a - b for a, b in zip(v, r)]
        assert all(x == 0 for x in linalg.matvec(ssm.weighted, kpart))
        row_cols.append(r)
        ker_cols.append(kpart)
    return (
        _from_columns(est, row_cols, f"row({est.label})"),
        _from_columns(est, ker_cols, f"ker({est.label})"),
    )


@dataclass(frozen=True)
class SpanCheck:
    """``coefficients[i][k]`` gives a_i(y) = sum_k coefficients[i][k] * y_k."""

    spanned: bool
    coefficients: dict[str, dict[str, Fraction]] | None = None
    failing_unit: str | None = None

    def __bool__(self) -> bool:
        return self.spanned


def is_sample_space_spanned(
    design: Design, est: LinearEstimator, graph: BipartiteGraph | None = None
) -> SpanCheck:
    """Solve S^T a = v for every study-unit column v.

    With ``graph`` the search is local: a_i may only carry y_k for edges
    (i, k), so a unit never contributes a study value it cannot observe.
    Without it any row-space vector counts, which on a full-rank design
    accepts every estimator.
    """
    ssm = sample_space_matrix(design)
    st = linalg.transpose(ssm.plain)
    coefficients: dict[str, dict[str, Fraction]] = {i: {} for i in design.units}
    for k in est.study_units:
        units = design.units if graph is None else [i for i in design.units if i in graph.beta(k)]
        cols = [design.units.index(i) for i in units]
        sub = [[row[c] for c in cols] for row in st]
        a = linalg.solve(sub, est.column(k)) if cols else (
            [] if all(x == 0 for x in est.column(k)) else None
        )
        if a is None:
            return SpanCheck(False, failing_unit=k)
        for i in design.units:
            coefficients[i][k] = ZERO
        for i, x in zip(units, a):
            coefficients[i][k] = x
    return SpanCheck(True, coefficients)


class Verdict(str, enum.Enum):
    SUFFICIENT_ADMISSIBLE = "SufficientAdmissibleDStar"
    SPANNED_ADMISSIBLE = "SampleSpaceSpannedAdmissibleDStarStar"
    KERNEL_PERTURBED_INADMISSIBLE = "KernelPerturbedInadmissible"
    UNKNOWN = "Unknown"


class NotUnbiasedError(ValueError):
    """Raised when an estimator handed to :func:`classify` is biased."""

    def __init__(self, biased: dict[str, Fraction]):
        self.biased = biased
        detail = ", ".join(f"{k}: E={v}" for k, v in biased.items())
        super().__init__(f"estimator is not unbiased ({detail})")


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    evidence: dict = field(default_factory=dict)
    dominating: LinearEstimator | None = None
    witness_y: tuple[Fraction, ...] | None = None
    variance_gap: Fraction | None = None


def basis_vector(units: Sequence[str], k: str) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(u == k)) for u in units)


def _witness(est: LinearEstimator) -> tuple[Fraction, ...]:
    for k in est.study_units:
        if any(c != 0 for c in est.column(k)):
            return basis_vector(est.study_units, k)
    return tuple(Fraction(1) for _ in est.study_units)


def biased_units(design: Design, est: LinearEstimator) -> dict[str, Fraction]:
    """Study units whose basis vector has expectation other than 1."""
    out = {}
    for k in est.study_units:
        m = expectation(design, est, basis_vector(est.study_units, k))
        if m != 1:
            out[k] = m
    return out


def classify(
    design: Design,
    graph: BipartiteGraph,
    est: LinearEstimator,
    builder: Builder | None = None,
) -> Classification:
    """Admissibility verdict for an unbiased linear estimator.

    Sufficiency is tried first, then sample-space spanning, then the
    Row/Ker decomposition.  Zero invariance can only be checked when the
    estimator's ``builder`` is supplied; it is reported, not enforced.
    """
    biased = biased_units(design, est)
    if biased:
        raise NotUnbiasedError(biased)
    evidence: dict = {"zero_invariant": None, "zero_inclusion_units": list(design.zero_inclusion_units())}
    if builder is not None:
        evidence["zero_invariant"] = check_zero_invariant(builder, design, graph).ok

    suff = is_sufficient(design, graph, est)
    span = is_sample_space_spanned(design, est, graph)
    evidence["sufficient"] = suff.sufficient
    evidence["sample_space_spanned"] = span.spanned
    evidence["row_space_member"] = bool(is_sample_space_spanned(design, est))
    if suff:
        return Classification(Verdict.SUFFICIENT_ADMISSIBLE, evidence)
    if span:
        evidence["spanning_coefficients"] = span.coefficients
        return Classification(Verdict.SPANNED_ADMISSIBLE, evidence)

    row_part, kernel_part = decompose(design, est)
    violation = row_part.observation_violation(graph)
    zero_mean = not biased_units(design, row_part)
    evidence["row_part_observes_only_sample"] = violation is None
    evidence["kernel_part_zero_mean"] = zero_mean
    if violation is not None or not zero_mean or kernel_part.is_zero():
        if violation is not None:
            s, k = violation
            evidence["reason"] = (
                f"row part uses y[{k}] on sample {design.sample_label(s)}, "
                "where it is not observed"
            )
        return Classification(Verdict.UNKNOWN, evidence)
    y = _witness(kernel_part)
    gap = variance(design, est, y) - variance(design, row_part, y)
    return Classification(
        Verdict.KERNEL_PERTURBED_INADMISSIBLE,
        evidence,
        dominating=row_part,
        witness_y=y,
        variance_gap=gap,
    )


@dataclass(frozen=True)
class OrthogonalityCertificate:
    granted: bool
    reason: str = ""
    witness_y: tuple[Fraction, ...] | None = None
    variance_gap: Fraction | None = None


def verify_orthogonal_pair(
    design: Design,
    e0: LinearEstimator,
    d: LinearEstimator,
    y: Sequence | None = None,
) -> OrthogonalityCertificate:
    """Certify ``e0 + d`` as dominated by ``e0`` when ``d`` is a zero-mean orthogonal direction.

    The variance gap is reported at ``y`` if given, otherwise at the first
    basis vector on which ``d`` is nonzero.
    """
    if d.is_zero():
        return OrthogonalityCertificate(False, "d is identically zero")
    means = {
        k: expectation(design, d, basis_vector(d.study_units, k)) for k in d.study_units
    }
    nonzero = {k: m for k, m in means.items() if m != 0}
    if nonzero:
        return OrthogonalityCertificate(False, f"E(d) != 0 for {sorted(nonzero)}")
    form = covariance_form(design, e0, d)
    if any(x != 0 for row in form for x in row):
        return OrthogonalityCertificate(False, "Cov(e0, d) is not identically zero")
    y = _witness(d) if y is None else tuple(Fraction(v) for v in y)
    gap = variance(design, e0 + d, y) - variance(design, e0, y)
    return OrthogonalityCertificate(True, "", y, gap)
