"""Sufficiency partitions, Rao-Blackwellization and its zero-invariant variant."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction

from .design import Design, Sample
from .estimator import (
    EstimatorError,
    LinearEstimator,
    PiecewiseEstimator,
)
from .graph import BipartiteGraph, KnowledgeLevel

ZERO = Fraction(0)


@dataclass(frozen=True)
class Block:
    image: tuple[str, ...]
    samples: tuple[Sample, ...]
    probability: Fraction


@dataclass(frozen=True)
class SufficiencyPartition:
    blocks: tuple[Block, ...]

    def block_of(self, s0: Iterable[str]) -> Block:
        s0 = frozenset(s0)
        for b in self.blocks:
            if s0 in b.samples:
                return b
        raise KeyError(sorted(s0))


def partition(
    design: Design, graph: BipartiteGraph, zero_pattern: Iterable[str] = ()
) -> SufficiencyPartition:
    """Group support samples by the observed study units outside ``zero_pattern``."""
    zero = set(zero_pattern)
    grouped: dict[tuple[str, ...], list[tuple[Sample, Fraction]]] = {}
    for s, p in design.items():
        image = tuple(k for k in graph.successors(s) if k not in zero)
        grouped.setdefault(image, []).append((s, p))
    rank = {k: n for n, k in enumerate(graph.study_units)}
    keys = sorted(grouped, key=lambda img: (len(img), [rank[k] for k in img]))
    blocks = []
    for img in keys:
        members = grouped[img]
        mass = sum((p for _, p in members), ZERO)
        assert mass > 0
        blocks.append(Block(img, tuple(s for s, _ in members), mass))
    return SufficiencyPartition(tuple(blocks))


def _block_average(
    design: Design, est: LinearEstimator, parts: SufficiencyPartition
) -> tuple[tuple[Fraction, ...], ...]:
    rows = dict(zip(est.samples, est.coefficients))
    averaged: dict[Sample, tuple[Fraction, ...]] = {}
    width = len(est.study_units)
    for b in parts.blocks:
        mean = tuple(
            sum((design.probability(s) * rows[s][n] for s in b.samples), ZERO)
            / b.probability
            for n in range(width)
        )
        for s in b.samples:
            averaged[s] = mean
    return tuple(averaged[s] for s in est.samples)


def _check(design: Design, graph: BipartiteGraph, est: LinearEstimator) -> None:
    if est.samples != design.support:
        raise EstimatorError("estimator table does not match the design support")
    if est.study_units != graph.study_units:
        raise EstimatorError("estimator columns do not match the graph")


def rao_blackwellize(
    design: Design, graph: BipartiteGraph, est: LinearEstimator
) -> LinearEstimator:
    """Average the coefficient rows over samples with the same study sample."""
    _check(design, graph, est)
    rows = _block_average(design, est, partition(design, graph))
    return LinearEstimator(
        est.samples,
        est.study_units,
        rows,
        max(est.knowledge, KnowledgeLevel.GRAPH),
        f"rb({est.label})",
    )


def zrb(
    design: Design,
    graph: BipartiteGraph,
    est: LinearEstimator | PiecewiseEstimator,
) -> PiecewiseEstimator:
    """Zero-invariant Rao-Blackwellization.

    For zero pattern ``Z`` the branch averages ``est`` (restricted to the
    units outside ``Z``) over samples whose observed nonzero units agree.
    A piecewise input is transformed branch by branch.
    """
    if est.samples != design.support or tuple(est.study_units) != graph.study_units:
        raise EstimatorError("estimator does not match the design and graph")

    def make_branch(z: frozenset[str]) -> LinearEstimator:
        if isinstance(est, PiecewiseEstimator):
            source = est.branch(z)
        else:
            source = est.drop_units(z)
        rows = _block_average(design, source, partition(design, graph, z))
        return LinearEstimator(
            est.samples,
            source.study_units,
            rows,
            KnowledgeLevel.SUCCESSOR_ANCESTRY,
            f"zrb({est.label})",
        )

    return PiecewiseEstimator(
        est.samples,
        graph.study_units,
        make_branch,
        KnowledgeLevel.SUCCESSOR_ANCESTRY,
        f"zrb({est.label})",
    )


@dataclass(frozen=True)
class SufficiencyCheck:
    sufficient: bool
    witness: tuple[Sample, Sample] | None = None

    def __bool__(self) -> bool:
        return self.sufficient


def is_sufficient(
    design: Design, graph: BipartiteGraph, est: LinearEstimator
) -> SufficiencyCheck:
    """Rows must agree within every block of the plain sufficiency partition."""
    _check(design, graph, est)
    for b in partition(design, graph).blocks:
        first = est.row(b.samples[0])
        for s in b.samples[1:]:
            if est.row(s) != first:
                return SufficiencyCheck(False, (b.samples[0], s))
    return SufficiencyCheck(True)
