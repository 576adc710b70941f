"""Shared model and grid fixtures for the test suite.

Four reference models cover the jump-measure variants end to end:

* ``gauss1d``   — 1-d purely Gaussian model with unit stationary variance;
* ``cp1d``      — 1-d Gaussian + single compensated unit jump atom;
* ``stable1d``  — 1-d Gaussian + symmetric 3/2-stable jumps (heavy tails);
* ``kinetic``   — 2-d hypoelliptic model (degenerate noise, coupled drift)
                  with decay rates 1/4 and 3/4.

Models are session-scoped: they memoize transition kernels, eigenfunctions,
and densities internally, and every test treats them as immutable.
"""

import pathlib

import numpy as np
import pytest

import levyou as lv


@pytest.fixture(scope="session")
def gauss1d():
    return lv.OuModel([[2.0]], [[-1.0]], lv.NullJumps())


@pytest.fixture(scope="session")
def cp1d():
    return lv.OuModel([[1.0]], [[-1.0]],
                      lv.FiniteAtomicJumps([[1.0]], [1.0]))


@pytest.fixture(scope="session")
def stable1d():
    return lv.OuModel([[1.0]], [[-1.0]],
                      lv.AlphaStableJumps(1.5, [[1.0], [-1.0]], [0.5, 0.5]))


@pytest.fixture(scope="session")
def kinetic():
    return lv.OuModel([[2.0, 0.0], [0.0, 0.0]],
                      [[-1.0, 0.1875], [-1.0, 0.0]],
                      lv.NullJumps())


@pytest.fixture(scope="session")
def stable_grid():
    # Heavy tails need a wide box before the far-field density is resolved.
    return lv.GridSpec((512.0,), (16384,))


@pytest.fixture(scope="session")
def cp_grid():
    return lv.GridSpec((16.0,), (1024,))


@pytest.fixture(scope="session")
def fixture_dir():
    return pathlib.Path(lv.__file__).parent / "fixtures"


@pytest.fixture()
def rng():
    return np.random.default_rng(20260822)
