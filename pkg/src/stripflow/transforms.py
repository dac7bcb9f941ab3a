"""Transforms between coefficient space and collocation values.

The vertical sine/cosine series are evaluated by odd/even extension onto a
doubled periodic grid of length 2*ny followed by a complex FFT, so Odd and
Even fields share the same collocation nodes and can be multiplied
pointwise.  The x-direction uses a plain FFT; the nodes start at -Lx, which
contributes the alternating phase (-1)^j relative to the usual 0-based
convention.

to_physical and to_spectral are exact inverses (to rounding) on the
band-limited space: zero x-Nyquist column, zero k=ny row.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParityError
from .fields import (
    Parity,
    PhysicalField,
    SpectralField,
    StripGrid,
    xi_index,
)

#: Odd-parity physical input whose wall rows exceed this (relative to the
#: field maximum, with an absolute floor of 1) is rejected as a parity bug.
BOUNDARY_TOL = 1e-12


def _alt_sign(grid):
    # exp(i xi_j x_m) = (-1)^j exp(2 pi i j m / nx) because x starts at -Lx
    return np.where(xi_index(grid) % 2 == 0, 1.0, -1.0)


def _amplitude_scale(grid, parity):
    """Per-row factor turning stored coefficients into raw mode amplitudes."""
    nk = grid.coeff_shape(parity)[1]
    s = np.full(nk, math.sqrt(math.pi) / grid.half_width_lx)
    if parity is Parity.EVEN:
        s[0] /= math.sqrt(2.0)
    return s


def to_physical(f: SpectralField) -> PhysicalField:
    """Evaluate the double series at the collocation nodes.

    The x-Nyquist column is dropped on synthesis (forced-zero convention)
    and Odd wall rows come out exactly zero.
    """
    grid = f.grid
    ny = grid.ny
    a = f.coeff * _amplitude_scale(grid, f.parity)[None, :]
    a[grid.nyquist_row, :] = 0.0

    # vertical synthesis on the doubled periodic grid
    spec = np.zeros((grid.nx, 2 * ny), dtype=np.complex128)
    if f.parity is Parity.ODD:
        # sin(k pi n/ny) = (e^{2 pi i k n/(2 ny)} - c.c.)/(2i); the k=ny row
        # cancels itself (sine Nyquist vanishes at every node)
        spec[:, 1:ny] = a[:, : ny - 1] * (-0.5j)
        spec[:, ny + 1 :] = (a[:, : ny - 1] * 0.5j)[:, ::-1]
    else:
        spec[:, 0] = a[:, 0]
        spec[:, 1:ny] = a[:, 1:ny] * 0.5
        spec[:, ny + 1 :] = (a[:, 1:ny] * 0.5)[:, ::-1]
        spec[:, ny] = a[:, ny]
    rows = (np.fft.ifft(spec, axis=1) * (2 * ny))[:, : ny + 1]

    # horizontal synthesis
    values = (np.fft.ifft(rows * _alt_sign(grid)[:, None], axis=0) * grid.nx).real
    if f.parity is Parity.ODD:
        values[:, 0] = 0.0
        values[:, ny] = 0.0
    return PhysicalField(grid, f.parity, values)


def to_spectral(f: PhysicalField) -> SpectralField:
    """Inverse of to_physical on the band-limited space.

    Raises:
        ParityError: Odd input with wall rows that are not (numerically) zero.
    """
    grid = f.grid
    ny = grid.ny
    if f.parity is Parity.ODD:
        scale = max(1.0, float(np.abs(f.values).max()))
        worst = max(float(np.abs(f.values[:, 0]).max()), float(np.abs(f.values[:, ny]).max()))
        if worst > BOUNDARY_TOL * scale:
            raise ParityError(
                f"odd-parity input has nonzero wall rows (max {worst:.3e}, "
                f"field scale {scale:.3e})"
            )

    rows = np.fft.fft(f.values, axis=0) * _alt_sign(grid)[:, None] / grid.nx

    doubled = np.empty((grid.nx, 2 * ny), dtype=np.complex128)
    doubled[:, : ny + 1] = rows
    if f.parity is Parity.ODD:
        doubled[:, ny + 1 :] = -rows[:, ny - 1 : 0 : -1]
    else:
        doubled[:, ny + 1 :] = rows[:, ny - 1 : 0 : -1]
    spec = np.fft.fft(doubled, axis=1) / (2 * ny)

    nk = grid.coeff_shape(f.parity)[1]
    a = np.zeros((grid.nx, nk), dtype=np.complex128)
    if f.parity is Parity.ODD:
        a[:, : ny - 1] = 2j * spec[:, 1:ny]
        # k=ny sine row is invisible on this grid; left zero
    else:
        a[:, 0] = spec[:, 0]
        a[:, 1:ny] = 2.0 * spec[:, 1:ny]
        a[:, ny] = spec[:, ny]
    coeff = a / _amplitude_scale(grid, f.parity)[None, :]
    coeff[grid.nyquist_row, :] = 0.0
    return SpectralField(grid, f.parity, coeff)


def pad_modes(f: SpectralField, factor: int = 2) -> SpectralField:
    """Embed coefficients in a grid refined by ``factor`` in both directions.

    The frequency lattice of the fine grid is a superset of the coarse one
    (same Lx), so the embedded field represents the same function; used for
    sup-norm evaluation on a refined collocation grid.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    grid = f.grid
    fine = StripGrid(grid.half_width_lx, factor * grid.nx, factor * grid.ny, grid.nu)
    out = SpectralField.zeros(fine, f.parity)
    half = grid.nx // 2
    kcount = f.coeff.shape[1]
    out.coeff[:half, :kcount] = f.coeff[:half]
    out.coeff[factor * grid.nx - half :, :kcount] = f.coeff[half:]
    return out


def physical_max(f: SpectralField, refine: int = 2) -> float:
    """Max of |f| sampled on a ``refine``-times finer collocation grid."""
    return float(np.abs(to_physical(pad_modes(f, refine)).values).max())


def quadrature_l2(f: PhysicalField) -> float:
    """L2 norm by rectangle rule in x and trapezoid in y.

    Exact for band-limited fields; used as the physical side of Parseval.
    """
    w = np.ones(f.grid.ny + 1)
    w[0] = w[-1] = 0.5
    total = float(np.sum(f.values**2 * w[None, :])) * f.grid.dx * f.grid.dy
    return math.sqrt(total)


def quadrature_l1(f: PhysicalField) -> float:
    """L1 norm by the same quadrature weights."""
    w = np.ones(f.grid.ny + 1)
    w[0] = w[-1] = 0.5
    return float(np.sum(np.abs(f.values) * w[None, :])) * f.grid.dx * f.grid.dy
