import logging

import numpy as np
import pytest

from dbec.functionals import PhysParams
from dbec.grid import iso_gaussian, make_grid
from dbec.ground_state import solve_free_ground_state

logging.getLogger("dbec").setLevel(logging.WARNING)


def random_field(grid, rng, smooth=1.0, complex_=True):
    """Smooth random field with Gaussian envelope (unit mass)."""
    z = rng.standard_normal(grid.n)
    if complex_:
        z = z + 1j * rng.standard_normal(grid.n)
    k2 = grid.k2
    z = np.fft.ifftn(np.fft.fftn(z) * np.exp(-0.5 * smooth * smooth * k2))
    z = z * np.exp(-0.25 * grid.r2 / max(grid.L) ** 2 * 16)
    z /= np.sqrt(np.sum(np.abs(z) ** 2) * grid.dV)
    return z


@pytest.fixture(scope="session")
def grid64():
    return make_grid(64, 8.0)


@pytest.fixture(scope="session")
def grid32():
    return make_grid(32, 8.0)


@pytest.fixture(scope="session")
def g64(grid64):
    return iso_gaussian(grid64)


@pytest.fixture(scope="session")
def cubic_gs(grid64):
    """Free ground state of the cubic focusing problem (lambda = (-1, 0), c = 1)."""
    return solve_free_ground_state(grid64, PhysParams(-1.0, 0.0))


@pytest.fixture(scope="session")
def dipolar_gs(grid64):
    return solve_free_ground_state(grid64, PhysParams(-1.0, 0.3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ---------------------------------------------------------------- acceptance log

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        tr.write_line(ACCEPTANCE[n])
    passed = sum(line.split()[2] == "PASS" for line in ACCEPTANCE.values())
    tr.write_line(f"{passed}/{len(ACCEPTANCE)} criteria pass")
