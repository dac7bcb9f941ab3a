"""Shared fixtures and slow reference implementations for the test suite."""

import math

import numpy as np
import pytest

from stripflow.fields import Parity, StripGrid, xi_index


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def small_grid():
    return StripGrid(half_width_lx=5.0 * math.pi, nx=16, ny=4, nu=0.7)


@pytest.fixture
def medium_grid():
    return StripGrid(half_width_lx=20.0 * math.pi, nx=64, ny=8, nu=1.0)


def direct_synthesis(field):
    """Slow direct evaluation of the double series at collocation nodes.

    Independent of the FFT implementation: nested sums with explicit basis
    functions, used as the transform oracle.
    """
    grid = field.grid
    nx, ny = grid.nx, grid.ny
    js = xi_index(grid)
    scale = math.sqrt(math.pi) / grid.half_width_lx
    xs = grid.x_nodes()
    ys = grid.y_nodes()
    out = np.zeros((nx, ny + 1), dtype=complex)
    if field.parity is Parity.ODD:
        ks = range(1, ny + 1)
        basis = lambda k, y: math.sin(k * math.pi * y)
        row_scale = {k: scale for k in ks}
    else:
        ks = range(0, ny + 1)
        basis = lambda k, y: math.cos(k * math.pi * y)
        row_scale = {k: scale for k in ks}
        row_scale[0] = scale / math.sqrt(2.0)
    j_nyq = grid.nyquist_row
    for m, x in enumerate(xs):
        for n, y in enumerate(ys):
            total = 0.0j
            for row, j in enumerate(js):
                if row == j_nyq:
                    continue
                phase = np.exp(1j * math.pi * j * x / grid.half_width_lx)
                for col, k in enumerate(ks):
                    total += row_scale[k] * field.coeff[row, col] * phase * basis(k, y)
            out[m, n] = total
    return out.real
