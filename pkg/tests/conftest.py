import sys
from fractions import Fraction
from pathlib import Path

import pytest

from rotdim.cf_engine import ConstantPQ, PeriodicPQ, PowerOfQ, RotationSpec, convergents
from rotdim.phi_models import BlockConstant, PowerLaw

DATA = Path(__file__).parent / "data"

# acceptance results, printed once at the end of the session
ACCEPTANCE = {}


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")


@pytest.fixture(scope="session")
def golden():
    return convergents(RotationSpec(ConstantPQ(1), 420), 400)


@pytest.fixture(scope="session")
def sqrt2():
    return convergents(RotationSpec(ConstantPQ(2), 420), 400)


@pytest.fixture(scope="session")
def example_table():
    return convergents(RotationSpec(PowerOfQ(Fraction(2)), 14), 12)


@pytest.fixture(scope="session")
def example_model(example_table):
    return BlockConstant("q[k]^2", "1/(2*q[k]^3)", example_table)


def corpus(golden, sqrt2, example_table, example_model):
    """The (name, table, model) pairs used by the property suites."""
    return [
        ("golden-g1", golden, PowerLaw(Fraction(1), Fraction(1))),
        ("golden-g1.5", golden, PowerLaw(Fraction(1), Fraction(3, 2))),
        ("golden-g2", golden, PowerLaw(Fraction(1), Fraction(2))),
        ("golden-g3", golden, PowerLaw(Fraction(1), Fraction(3))),
        ("sqrt2-g2", sqrt2, PowerLaw(Fraction(1), Fraction(2))),
        ("golden-minkowski", golden, PowerLaw(Fraction(1, 4), Fraction(1))),
        ("example", example_table, example_model),
    ]


@pytest.fixture(scope="session")
def corpus_list(golden, sqrt2, example_table, example_model):
    return corpus(golden, sqrt2, example_table, example_model)
