import random
from fractions import Fraction

import pytest

from bigs.design import srs_design
from bigs.io import load_design, load_graph


def random_rational(rng: random.Random, lo: int = -9, hi: int = 9, den: int = 7) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def random_y(rng: random.Random, n: int, zero_rate: float = 0.3) -> tuple[Fraction, ...]:
    """Random rational vector with exact zeros mixed in."""
    return tuple(
        Fraction(0) if rng.random() < zero_rate else random_rational(rng) for _ in range(n)
    )


def brute_variance(design, values) -> Fraction:
    """Central second moment of per-sample values, straight from the definition."""
    mean = sum(p * v for p, v in zip(design.probabilities, values))
    return sum(p * (v - mean) ** 2 for p, v in zip(design.probabilities, values))


@pytest.fixture
def fig1():
    return load_graph("fig1")


@pytest.fixture
def fig3():
    return load_graph("fig3")


@pytest.fixture
def trimmed():
    return load_graph("fig1_trimmed")


@pytest.fixture
def ex2_design():
    return load_design("example2_design")


@pytest.fixture
def srs24(trimmed):
    return srs_design(trimmed.sampling_units, 2)


def covered_pairs():
    """(name, design, graph) for every bundled covered fixture combination."""
    fig3 = load_graph("fig3")
    trimmed = load_graph("fig1_trimmed")
    ex2 = load_design("example2_design")
    units = trimmed.sampling_units
    return [
        ("fig3/example2", ex2, fig3),
        ("fig3-k1/example2", ex2, fig3.remove_units(["k1"])),
        ("trimmed/srs2", srs_design(units, 2), trimmed),
        ("trimmed/srs3", srs_design(units, 3), trimmed),
        ("trimmed/systematic", load_design("systematic_design"), trimmed),
        ("trimmed/minsupport", load_design("minsupport_design"), trimmed),
    ]


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """Record a criterion outcome; the test fails if the criterion does."""

    def record(number: int, ok: bool, detail: str = "") -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
