import time

import pytest

from gamemanip.contracts import BindingOffer, CounterOffer, SecondOrderOffer
from gamemanip.game import base_game
from gamemanip.scenarios import build_scenario, reference_tables, run_scenario

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS = {}


@pytest.fixture
def base():
    return base_game()


@pytest.fixture
def col_offer():
    return BindingOffer("Col", "Row", 3, 2, "T")


@pytest.fixture
def m1_offer():
    return BindingOffer("M1", "Row", 3, 2, "T")


@pytest.fixture
def row_counter():
    return CounterOffer("Row", 2, "R")


@pytest.fixture
def m2_offer():
    return SecondOrderOffer("M2", "M1", 2, CounterOffer("Row", 2, "R"))


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_RESULTS


@pytest.fixture(scope="session")
def printed():
    """Tables exactly as printed for the four scenarios."""
    return reference_tables()


@pytest.fixture(scope="session")
def scenario_reports():
    """Full default-parameter runs of all four scenarios, computed once."""
    start = time.perf_counter()
    reports = {i: run_scenario(build_scenario(i)) for i in (1, 2, 3, 4)}
    return reports, time.perf_counter() - start


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
