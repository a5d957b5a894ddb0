"""Exact design moments of estimators."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction

from .design import Design
from .estimator import Estimator, EstimatorError, LinearEstimator, as_vector

ZERO = Fraction(0)


def _check_support(design: Design, est) -> None:
    if tuple(est.samples) != design.support:
        raise EstimatorError("estimator table does not match the design support")


def expectation(design: Design, est: Estimator, y) -> Fraction:
    _check_support(design, est)
    return sum((p * v for p, v in zip(design.probabilities, est.values(y))), ZERO)


def covariance(design: Design, e1: Estimator, e2: Estimator, y) -> Fraction:
    _check_support(design, e1)
    _check_support(design, e2)
    v1, v2 = e1.values(y), e2.values(y)
    m1 = sum((p * a for p, a in zip(design.probabilities, v1)), ZERO)
    m2 = sum((p * b for p, b in zip(design.probabilities, v2)), ZERO)
    return sum(
        (p * (a - m1) * (b - m2) for p, a, b in zip(design.probabilities, v1, v2)),
        ZERO,
    )


def variance(design: Design, est: Estimator, y) -> Fraction:
    return covariance(design, est, est, y)


@dataclass(frozen=True)
class MomentReport:
    expectation: Fraction
    variance: Fraction
    target: Fraction

    @property
    def bias(self) -> Fraction:
        return self.expectation - self.target


def moment_report(design: Design, est: Estimator, y) -> MomentReport:
    """Expectation and variance at ``y``; the target is the total of ``y``."""
    target = sum(as_vector(y, est.study_units), ZERO)
    return MomentReport(expectation(design, est, y), variance(design, est, y), target)


def covariance_form(
    design: Design, e1: LinearEstimator, e2: LinearEstimator
) -> tuple[tuple[Fraction, ...], ...]:
    """Symmetric matrix ``M`` with ``Cov(e1, e2)(y) == y' M y`` for every y."""
    _check_support(design, e1)
    _check_support(design, e2)
    if e1.study_units != e2.study_units:
        raise EstimatorError("estimators have different study units")
    n = len(e1.study_units)
    p = design.probabilities
    m1 = [sum((pp * r[a] for pp, r in zip(p, e1.coefficients)), ZERO) for a in range(n)]
    m2 = [sum((pp * r[a] for pp, r in zip(p, e2.coefficients)), ZERO) for a in range(n)]
    raw = [
        [
            sum((pp * r1[a] * r2[b] for pp, r1, r2 in zip(p, e1.coefficients, e2.coefficients)), ZERO)
            - m1[a] * m2[b]
            for b in range(n)
        ]
        for a in range(n)
    ]
    return tuple(
        tuple((raw[a][b] + raw[b][a]) / 2 for b in range(n)) for a in range(n)
    )


def quadratic_value(matrix, y) -> Fraction:
    y = [Fraction(v) for v in y]
    return sum(
        (y[a] * matrix[a][b] * y[b] for a in range(len(y)) for b in range(len(y))), ZERO
    )


@dataclass(frozen=True)
class BlockMinimum:
    value: Fraction
    second_moment: Fraction


def lagrangian_minimizer(
    design: Design, block: Iterable[Iterable[str]], target
) -> BlockMinimum:
    """Minimise sum p*e^2 over ``block`` subject to sum p*e == target.

    The unique minimiser is the constant ``target / P(block)``.
    """
    block = [frozenset(s) for s in block]
    if not block:
        raise ValueError("empty block")
    mass = design.block_probability(block)
    value = Fraction(target) / mass
    return BlockMinimum(value, mass * value * value)


@dataclass(frozen=True)
class MixtureResult:
    alpha: Fraction
    variance: Fraction
    baseline: Fraction

    @property
    def improves(self) -> bool:
        return self.variance < self.baseline


def mixture_improvement(
    design: Design, e0: Estimator, d: Estimator, y
) -> MixtureResult:
    """Best step along a zero-mean direction: minimise V(e0 + alpha*d) over alpha."""
    if expectation(design, d, y) != 0:
        raise ValueError("direction d must have zero expectation at y")
    vd = variance(design, d, y)
    if vd == 0:
        raise ValueError("direction d has zero variance at y")
    v0 = variance(design, e0, y)
    cov = covariance(design, e0, d, y)
    alpha = -cov / vd
    return MixtureResult(alpha, v0 + alpha * alpha * vd + 2 * alpha * cov, v0)
