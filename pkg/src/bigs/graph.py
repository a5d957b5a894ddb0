"""Bipartite incidence graphs and sample graphs."""

from __future__ import annotations

import enum
from collections.abc import Iterable
from dataclasses import dataclass, field


class GraphError(ValueError):
    """Raised for malformed graphs or unknown unit identifiers."""


class KnowledgeLevel(enum.IntEnum):
    """How much of the graph an estimator needs to know.

    Ordered so that a higher level implies every lower one.
    """

    ANCESTRY = 1
    SUCCESSOR_ANCESTRY = 2
    GRAPH = 3

    @property
    def label(self) -> str:
        return {1: "Ancestry", 2: "SuccessorAncestry", 3: "Graph"}[int(self)]

    @classmethod
    def parse(cls, text: str) -> KnowledgeLevel:
        for level in cls:
            if text in (level.label, level.name):
                return level
        raise ValueError(f"unknown knowledge level {text!r}")


@dataclass(frozen=True)
class SampleGraph:
    initial_sample: tuple[str, ...]
    observed_units: tuple[str, ...]
    observed_edges: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class BipartiteGraph:
    """A bipartite simple digraph with edges from sampling units to study units.

    Unit order is declaration order; every query returns units in that order.
    """

    sampling_units: tuple[str, ...]
    study_units: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    _alpha: dict[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)
    _beta: dict[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)

    def __init__(
        self,
        sampling_units: Iterable[str],
        study_units: Iterable[str],
        edges: Iterable[tuple[str, str]],
    ) -> None:
        f_units = tuple(sampling_units)
        omega = tuple(study_units)
        edge_list = [tuple(e) for e in edges]
        if not f_units:
            raise GraphError("sampling units must be non-empty")
        if len(set(f_units)) != len(f_units) or len(set(omega)) != len(omega):
            raise GraphError("duplicate unit identifier")
        if set(f_units) & set(omega):
            raise GraphError("sampling and study identifiers overlap")
        if len(set(edge_list)) != len(edge_list):
            raise GraphError("duplicate edge")
        f_set, o_set = set(f_units), set(omega)
        for i, k in edge_list:
            if i not in f_set or k not in o_set:
                raise GraphError(f"edge ({i}, {k}) has an unknown endpoint")
        object.__setattr__(self, "sampling_units", f_units)
        object.__setattr__(self, "study_units", omega)
        object.__setattr__(self, "edges", frozenset(edge_list))
        object.__setattr__(
            self,
            "_alpha",
            {i: tuple(k for k in omega if (i, k) in self.edges) for i in f_units},
        )
        object.__setattr__(
            self,
            "_beta",
            {k: tuple(i for i in f_units if (i, k) in self.edges) for k in omega},
        )

    def _check_sampling(self, s: Iterable[str]) -> set[str]:
        s = set(s)
        unknown = s - set(self.sampling_units)
        if unknown:
            raise GraphError(f"unknown sampling units {sorted(unknown)}")
        return s

    def _check_study(self, units: Iterable[str]) -> set[str]:
        units = set(units)
        unknown = units - set(self.study_units)
        if unknown:
            raise GraphError(f"unknown study units {sorted(unknown)}")
        return units

    def alpha(self, i: str) -> tuple[str, ...]:
        """Successors of a single sampling unit."""
        self._check_sampling([i])
        return self._alpha[i]

    def beta(self, k: str) -> tuple[str, ...]:
        """Ancestors of a single study unit."""
        self._check_study([k])
        return self._beta[k]

    def successors(self, s: Iterable[str]) -> tuple[str, ...]:
        s = self._check_sampling(s)
        hit = {k for i in s for k in self._alpha[i]}
        return tuple(k for k in self.study_units if k in hit)

    def ancestors(self, units: Iterable[str]) -> tuple[str, ...]:
        units = self._check_study(units)
        hit = {i for k in units for i in self._beta[k]}
        return tuple(i for i in self.sampling_units if i in hit)

    def sample_graph(self, s0: Iterable[str]) -> SampleGraph:
        s0 = self._check_sampling(s0)
        edges = tuple(
            (i, k) for i in self.sampling_units if i in s0 for k in self._alpha[i]
        )
        return SampleGraph(
            initial_sample=tuple(i for i in self.sampling_units if i in s0),
            observed_units=self.successors(s0),
            observed_edges=edges,
        )

    def remove_units(self, units: Iterable[str]) -> BipartiteGraph:
        """Drop study units and every edge ending in them; F is unchanged."""
        gone = self._check_study(units)
        return BipartiteGraph(
            self.sampling_units,
            [k for k in self.study_units if k not in gone],
            [(i, k) for (i, k) in self.sorted_edges() if k not in gone],
        )

    def extend_elemental(self, j: str, new_id: str) -> BipartiteGraph:
        """Add a new study unit reachable only from ``j``."""
        self._check_sampling([j])
        if new_id in self.study_units or new_id in self.sampling_units:
            raise GraphError(f"identifier {new_id!r} already in use")
        return BipartiteGraph(
            self.sampling_units,
            self.study_units + (new_id,),
            self.sorted_edges() + ((j, new_id),),
        )

    def sorted_edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(
            (i, k) for i in self.sampling_units for k in self._alpha[i]
        )

    def to_dict(self) -> dict:
        return {
            "sampling_units": list(self.sampling_units),
            "study_units": list(self.study_units),
            "edges": [list(e) for e in self.sorted_edges()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> BipartiteGraph:
        return cls(data["sampling_units"], data["study_units"], [tuple(e) for e in data["edges"]])


def elemental_graph(sampling_units: Iterable[str], i: str, k: str = "k") -> BipartiteGraph:
    """Graph with a single study unit and the single edge (i, k)."""
    return BipartiteGraph(sampling_units, [k], [(i, k)])
