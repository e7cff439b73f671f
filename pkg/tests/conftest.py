import numpy as np
import pytest
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

from tlbethe.model import ModelParams

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def spectral(draw, spread=0.4):
    """Complex spectral parameter near the unit circle, away from +-1."""
    r = draw(st.floats(-spread, spread))
    phi = draw(st.floats(0.05, np.pi - 0.05)) * draw(st.sampled_from([1, -1]))
    return complex(np.exp(r + 1j * phi))


@st.composite
def deformations(draw):
    """Q with modulus in [0.6, 1.8] and a small phase; degenerate points are rejected."""
    mod = draw(st.floats(0.6, 1.8))
    phase = draw(st.floats(-0.5, 0.5))
    return complex(mod * np.exp(1j * phase))


def make_params(N, Q, branch="plus"):
    try:
        return ModelParams(N, Q, branch)
    except ValueError:
        assume(False)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


@pytest.fixture(params=["plus", "minus"])
def branch(request):
    return request.param


def draw_spectral(rng, n=None, spread=0.3):
    size = 1 if n is None else n
    vals = np.exp(rng.uniform(-spread, spread, size) + 1j * rng.uniform(0, 2 * np.pi, size))
    return complex(vals[0]) if n is None else [complex(v) for v in vals]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[cid].line())
