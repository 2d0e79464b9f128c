import numpy as np
import pytest

from otsm import channel as ch
from otsm.frame import FrameParams, QamConstellation, build_grid


def random_paths(params, rng, n_paths=4, fractional_delay=False):
    """Integer (or fractional) delays up to l_max with fractional Doppler."""
    gains = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / np.sqrt(2 * n_paths)
    if fractional_delay:
        delays = rng.uniform(0, params.l_max, n_paths)
    else:
        delays = rng.integers(0, params.l_max + 1, n_paths).astype(float)
    dopplers = rng.uniform(-1.5, 1.5, n_paths)
    return ch.PathSet(gains, delays, dopplers)


def random_grid(params, rng, pilot=0.0):
    c = QamConstellation(params.qam_order)
    bits = rng.integers(0, 2, params.n_data * c.bits_per_symbol)
    return build_grid(params, c.map(bits), pilot), bits


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_params():
    return FrameParams(N=8, M=8, l_max=2)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
