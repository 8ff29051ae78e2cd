import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from peglab import fixtures
from peglab.spectral import select_spectral_function
from peglab.sweep import sweep_spectrum


@pytest.fixture(scope="session")
def circle():
    return fixtures.circle()


@pytest.fixture(scope="session")
def ellipse():
    return fixtures.ellipse21()


@pytest.fixture(scope="session")
def square64():
    return fixtures.square64()


@pytest.fixture(scope="session")
def square_polygon():
    return fixtures.square_polygon()


_SWEEPS = {}


@pytest.fixture(scope="session")
def small_sweep():
    """Cached 64-step sweeps shared by the sweep and spectral tests."""
    def get(name):
        if name not in _SWEEPS:
            curve = fixtures.builtin_curve(name)
            _SWEEPS[name] = sweep_spectrum(curve, 0.1, 3.0, n_steps=64, grid_n=32)
        return _SWEEPS[name]
    return get


_SPECTRALS = {}


@pytest.fixture(scope="session")
def small_spectral(small_sweep):
    def get(name):
        if name not in _SPECTRALS:
            _SPECTRALS[name] = select_spectral_function(small_sweep(name))
        return _SPECTRALS[name]
    return get
