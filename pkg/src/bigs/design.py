"""Finite-support initial sampling designs with exact probabilities."""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .graph import BipartiteGraph

Sample = frozenset[str]


class DesignError(ValueError):
    """Raised for invalid designs or queries outside the design."""


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"num/den"`` strings; floats are refused."""
    if isinstance(value, float):
        raise DesignError(f"floating point value {value!r} is not exact")
    return Fraction(value)


@dataclass(frozen=True)
class Coverage:
    covered: bool
    uncovered: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.covered


@dataclass(frozen=True)
class Design:
    """A probability distribution over subsets of the sampling units.

    ``support`` keeps the order it was given in; :func:`srs_design` and
    :meth:`canonical` produce the lexicographic order by unit index.
    """

    units: tuple[str, ...]
    support: tuple[Sample, ...]
    probabilities: tuple[Fraction, ...]

    def __init__(
        self,
        units: Iterable[str],
        support: Iterable[Iterable[str]],
        probabilities: Iterable,
    ) -> None:
        units = tuple(units)
        support = tuple(frozenset(s) for s in support)
        probs = tuple(as_fraction(p) for p in probabilities)
        if len(support) != len(probs):
            raise DesignError("support and probabilities differ in length")
        if not support:
            raise DesignError("empty support")
        if len(set(support)) != len(support):
            raise DesignError("support samples must be distinct")
        if any(p <= 0 for p in probs):
            raise DesignError("support probabilities must be strictly positive")
        if sum(probs) != 1:
            raise DesignError(f"probabilities sum to {sum(probs)}, not 1")
        known = set(units)
        for s in support:
            if not s <= known:
                raise DesignError(f"sample {sorted(s)} names unknown units")
        object.__setattr__(self, "units", units)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probabilities", probs)

    def __len__(self) -> int:
        return len(self.support)

    def items(self) -> Iterable[tuple[Sample, Fraction]]:
        return zip(self.support, self.probabilities)

    def probability(self, s0: Iterable[str]) -> Fraction:
        return self.probabilities[self.index(s0)]

    def index(self, s0: Iterable[str]) -> int:
        try:
            return self.support.index(frozenset(s0))
        except ValueError:
            raise DesignError(f"sample {sorted(s0)} is not in the support") from None

    def _check_unit(self, i: str) -> None:
        if i not in self.units:
            raise DesignError(f"unknown sampling unit {i!r}")

    def unit_inclusion(self, i: str, j: str | None = None) -> Fraction:
        """First- or second-order inclusion probability of sampling units."""
        self._check_unit(i)
        if j is not None:
            self._check_unit(j)
        wanted = {i} if j is None else {i, j}
        return sum((p for s, p in self.items() if wanted <= s), Fraction(0))

    def study_inclusion(
        self, graph: BipartiteGraph, k: str, l: str | None = None
    ) -> Fraction:
        """Probability that study unit ``k`` (and ``l``) is observed."""
        total = Fraction(0)
        beta_k = set(graph.beta(k))
        beta_l = set(graph.beta(l)) if l is not None else None
        for s, p in self.items():
            if s & beta_k and (beta_l is None or s & beta_l):
                total += p
        return total

    def covers(self, graph: BipartiteGraph) -> Coverage:
        missing = tuple(
            k for k in graph.study_units if self.study_inclusion(graph, k) == 0
        )
        return Coverage(not missing, missing)

    def block_probability(self, samples: Iterable[Iterable[str]]) -> Fraction:
        return sum((self.probability(s) for s in samples), Fraction(0))

    def zero_inclusion_units(self) -> tuple[str, ...]:
        """Sampling units never selected; the admissibility results assume there are none."""
        return tuple(i for i in self.units if self.unit_inclusion(i) == 0)

    def sample_key(self, s0: Sample) -> tuple[int, ...]:
        return tuple(sorted(self.units.index(i) for i in s0))

    def sample_label(self, s0: Sample) -> str:
        return ",".join(self.units[n] for n in self.sample_key(s0))

    def canonical(self) -> Design:
        order = sorted(range(len(self)), key=lambda n: self.sample_key(self.support[n]))
        return Design(
            self.units,
            [self.support[n] for n in order],
            [self.probabilities[n] for n in order],
        )

    def to_dict(self) -> dict:
        return {
            "units": list(self.units),
            "support": [
                [self.units[n] for n in self.sample_key(s)] for s in self.support
            ],
            "probabilities": [
                f"{p.numerator}/{p.denominator}" for p in self.probabilities
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, units: Sequence[str] | None = None) -> Design:
        if units is None:
            units = data.get("units")
        if units is None:
            seen: dict[str, None] = {}
            for s in data["support"]:
                seen.update(dict.fromkeys(s))
            units = list(seen)
        return cls(units, data["support"], data["probabilities"])


def srs_design(units: Sequence[str], n: int) -> Design:
    """Simple random sampling without replacement of fixed size ``n``."""
    if not 1 <= n <= len(units):
        raise DesignError(f"sample size {n} outside 1..{len(units)}")
    samples = [frozenset(c) for c in itertools.combinations(units, n)]
    p = Fraction(1, math.comb(len(units), n))
    return Design(units, samples, [p] * len(samples))
