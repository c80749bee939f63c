import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from noether_bilayer.integrate import Tolerances  # noqa: E402
from noether_bilayer.invariants import fundamental_pair  # noqa: E402
from noether_bilayer.model import phi_bessel, phi_zero  # noqa: E402

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def zero_profile():
    return phi_zero()


@pytest.fixture(scope="session")
def bessel1():
    return phi_bessel(1)


@pytest.fixture(scope="session")
def bessel3():
    return phi_bessel(3)


@pytest.fixture(scope="session")
def zero_pair(zero_profile):
    return fundamental_pair(zero_profile, 0.0, 50.0, Tolerances(rel=1e-12, abs=1e-14))


@pytest.fixture(scope="session")
def pair1(bessel1):
    return fundamental_pair(bessel1, 1e-2, 50.0)


@pytest.fixture(scope="session")
def pair3(bessel3):
    return fundamental_pair(bessel3, 1e-2, 50.0)


@pytest.fixture(scope="session")
def pair1_tight(bessel1):
    return fundamental_pair(bessel1, 1e-2, 50.0, Tolerances(rel=1e-13, abs=1e-15))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
