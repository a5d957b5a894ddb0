import random
from fractions import Fraction as Q

import pytest

from bigs.design import srs_design
from bigs.estimator import (
    build_hte,
    build_iwe,
    build_lexicographic,
    build_multiplicity,
    ht_type_weights,
    lexicographic_order,
)
from bigs.graph import KnowledgeLevel
from bigs.moments import expectation, variance
from bigs.raoblackwell import is_sufficient, partition, rao_blackwellize, zrb
from bigs.spectra import basis_vector

from .conftest import covered_pairs, random_y


def rb_oracle(design, graph, est, y, zero=frozenset()):
    """Conditional mean of the estimate given the observed nonzero units, by enumeration."""
    values = dict(zip(design.support, est.values(y)))
    out = []
    for s in design.support:
        key = set(graph.successors(s)) - zero
        peers = [t for t in design.support if set(graph.successors(t)) - zero == key]
        mass = sum(design.probability(t) for t in peers)
        out.append(sum(design.probability(t) * values[t] for t in peers) / mass)
    return tuple(out)


def test_partition_example2(ex2_design, fig3):
    plain = partition(ex2_design, fig3)
    assert [(b.image, b.samples) for b in plain.blocks] == [
        (("k2",), (frozenset({"i2", "i3"}),)),
        (("k1", "k2"), (frozenset({"i1", "i2"}),)),
    ]
    merged = partition(ex2_design, fig3, {"k1"})
    assert len(merged.blocks) == 1
    assert merged.blocks[0].probability == 1
    assert merged.blocks[0].samples == ex2_design.support
    single = srs_design(fig3.sampling_units, 3)
    assert len(partition(single, fig3).blocks) == 1


@pytest.mark.parametrize("name,design,graph", covered_pairs())
def test_partition_is_a_partition(name, design, graph):
    for z in ((), graph.study_units[:1], graph.study_units):
        parts = partition(design, graph, z)
        members = [s for b in parts.blocks for s in b.samples]
        assert sorted(members, key=design.sample_key) == sorted(design.support, key=design.sample_key)
        assert sum(b.probability for b in parts.blocks) == 1


def test_rb_example2(ex2_design, fig3):
    reduced = fig3.remove_units({"k1"})
    rb = rao_blackwellize(ex2_design, reduced, build_multiplicity(ex2_design, reduced))
    assert rb.coefficients == ((1,), (1,))
    assert rb.knowledge is KnowledgeLevel.GRAPH
    e = build_multiplicity(ex2_design, fig3)
    assert rao_blackwellize(ex2_design, fig3, e).coefficients == e.coefficients
    hte = build_hte(ex2_design, fig3)
    assert rao_blackwellize(ex2_design, fig3, hte).coefficients == hte.coefficients


def test_zrb_example2(ex2_design, fig3):
    z = zrb(ex2_design, fig3, build_multiplicity(ex2_design, fig3))
    assert z.knowledge is KnowledgeLevel.SUCCESSOR_ANCESTRY
    assert z.branch({"k1"}).coefficients == ((1,), (1,))
    assert z.branch({"k1", "k2"}).study_units == ()
    assert z.values([0, 0]) == (0, 0)
    assert z.values([0, 5]) == (5, 5)
    assert variance(ex2_design, z, [0, 1]) == 0


@pytest.mark.parametrize("name,design,graph", covered_pairs())
def test_zrb_of_hte_is_restricted_hte(name, design, graph):
    z = zrb(design, graph, build_hte(design, graph))
    for pattern, branch in z.branches().items():
        direct = build_hte(design, graph.remove_units(pattern))
        assert branch.coefficients == direct.coefficients


@pytest.mark.parametrize("name,design,graph", covered_pairs())
def test_rb_and_zrb_match_enumeration(name, design, graph):
    rng = random.Random(name)
    for est in (build_multiplicity(design, graph), build_lexicographic(design, graph, lexicographic_order(design))):
        rb = rao_blackwellize(design, graph, est)
        z = zrb(design, graph, est)
        for _ in range(15):
            y = random_y(rng, len(graph.study_units))
            zero = frozenset(k for k, v in zip(graph.study_units, y) if v == 0)
            assert rb.values(y) == rb_oracle(design, graph, est, y)
            assert z.values(y) == rb_oracle(design, graph, est, y, zero)


@pytest.mark.parametrize("name,design,graph", covered_pairs())
def test_rb_properties(name, design, graph):
    forward = lexicographic_order(design)
    ests = [
        build_multiplicity(design, graph),
        build_iwe(design, graph, ht_type_weights(design, graph)),
        build_lexicographic(design, graph, forward),
        build_lexicographic(design, graph, forward[::-1]),
    ]
    for e in ests:
        rb = rao_blackwellize(design, graph, e)
        assert is_sufficient(design, graph, rb)
        for k in graph.study_units:
            y = basis_vector(graph.study_units, k)
            assert expectation(design, rb, y) == expectation(design, e, y)
        z = zrb(design, graph, e)
        again = zrb(design, graph, z)
        for pattern, branch in z.branches().items():
            assert again.branch(pattern).coefficients == branch.coefficients
        assert z.branch(()).coefficients == rb.coefficients


def test_is_sufficient(ex2_design, fig3, srs24, trimmed):
    assert is_sufficient(ex2_design, fig3, build_hte(ex2_design, fig3))
    assert is_sufficient(srs24, trimmed, build_hte(srs24, trimmed))
    reduced = fig3.remove_units({"k1"})
    check = is_sufficient(ex2_design, reduced, build_multiplicity(ex2_design, reduced))
    assert not check
    assert check.witness == (frozenset({"i1", "i2"}), frozenset({"i2", "i3"}))
    # every estimator is sufficient when each block is a single sample
    assert is_sufficient(ex2_design, fig3, build_multiplicity(ex2_design, fig3))


def test_variance_chain_example2(ex2_design, fig3):
    e = build_multiplicity(ex2_design, fig3)
    y = [0, 1]
    v_e = variance(ex2_design, e, y)
    v_rb = variance(ex2_design, rao_blackwellize(ex2_design, fig3, e), y)
    v_z = variance(ex2_design, zrb(ex2_design, fig3, e), y)
    assert (v_z, v_rb, v_e) == (0, Q(1, 18), Q(1, 18))
