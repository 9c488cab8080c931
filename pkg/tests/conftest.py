"""Shared fixtures: a reference medium, standard curves and cached solutions."""

import numpy as np
import pytest

from elastolab.geometry import make_curve
from elastolab.media import LONGITUDINAL, TRANSVERSAL, ElasticMedium, IncidentPlaneWave
from elastolab.solver import solve_dirichlet


@pytest.fixture(scope="session")
def medium():
    # lambda = 2, mu = rho = 1, omega = 2: k_p = 1, k_s = 2
    return ElasticMedium(2.0, 1.0, 1.0, 2.0)


@pytest.fixture(scope="session")
def p_wave():
    return IncidentPlaneWave(LONGITUDINAL, angle=0.0)


@pytest.fixture(scope="session")
def s_wave():
    return IncidentPlaneWave(TRANSVERSAL, angle=0.7, phase=0.3)


@pytest.fixture(scope="session")
def unit_disc():
    return make_curve("disc", radius=1.0)


@pytest.fixture(scope="session")
def kite():
    return make_curve("kite", scale=1.0)


@pytest.fixture(scope="session")
def ellipse():
    return make_curve("ellipse", a=1.2, b=0.7, rotation=0.4)


@pytest.fixture(scope="session")
def disc_solution(medium, unit_disc, p_wave):
    return solve_dirichlet(medium, unit_disc, p_wave, 256)


@pytest.fixture(scope="session")
def kite_solution(medium, kite, s_wave):
    return solve_dirichlet(medium, kite, s_wave, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    def record(number, title, ok, detail):
        ACCEPTANCE_LINES[number] = f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}: {detail}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
