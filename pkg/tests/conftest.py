import numpy as np
import pytest

from ebeam_mdp.model import EblParams, ShotBounds


def rel_err(analytic, numeric, floor=1e-12):
    """Elementwise relative error with a small absolute floor."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)


def interior_params(rng, n, grid, margin=8, size=(4, 20), continuous=True):
    """Random shots well inside the grid; real-valued geometry when ``continuous``."""
    w = rng.uniform(*size, n)
    h = rng.uniform(*size, n)
    x = rng.uniform(margin, grid - margin - w)
    y = rng.uniform(margin, grid - margin - h)
    d = rng.uniform(0.6, 1.8, n)
    q = rng.uniform(0.3, 1.0, n) if continuous else np.ones(n)
    p = np.column_stack([x, y, w, h, d, q])
    if not continuous:
        p[:, :4] = np.round(p[:, :4])
    return p


@pytest.fixture
def ebl():
    return EblParams()


@pytest.fixture
def small_ebl():
    # short backscatter range so small grids stay interior
    return EblParams(sigma_f=1.5, sigma_b=6.0, eta=0.8)


@pytest.fixture
def bounds():
    return ShotBounds()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
