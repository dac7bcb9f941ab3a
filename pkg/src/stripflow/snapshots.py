"""Snapshot serialization: one CSV file per field with a header line.

Header:  # t=<t> nx=<nx> ny=<ny> lx=<Lx> nu=<nu> parity=<odd|even>
Rows:    j,k,re,im   for every lattice coefficient.

Floats are written with repr (shortest round-trip form), so a dump/load
cycle is bit-exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .fields import FlowState, Parity, SpectralField, StripGrid, xi_index, y_wavenumbers


def save_field_csv(field: SpectralField, t: float, path):
    grid = field.grid
    lines = [
        f"# t={t!r} nx={grid.nx} ny={grid.ny} lx={grid.half_width_lx!r} "
        f"nu={grid.nu!r} parity={field.parity.value}",
        "j,k,re,im",
    ]
    js = xi_index(grid)
    ks = y_wavenumbers(grid, field.parity)
    for row, j in enumerate(js):
        for col, k in enumerate(ks):
            c = field.coeff[row, col]
            lines.append(f"{j},{k},{float(c.real)!r},{float(c.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_field_csv(path):
    """Read a field dump; returns (t, SpectralField)."""
    text = Path(path).read_text().splitlines()
    header = text[0]
    if not header.startswith("# "):
        raise ValueError(f"{path}: missing header line")
    meta = dict(item.split("=", 1) for item in header[2:].split())
    grid = StripGrid(
        half_width_lx=float(meta["lx"]),
        nx=int(meta["nx"]),
        ny=int(meta["ny"]),
        nu=float(meta["nu"]),
    )
    parity = Parity(meta["parity"])
    t = float(meta["t"])

    js = xi_index(grid)
    row_of = {int(j): i for i, j in enumerate(js)}
    ks = y_wavenumbers(grid, parity)
    col_of = {int(k): i for i, k in enumerate(ks)}
    coeff = np.zeros(grid.coeff_shape(parity), dtype=np.complex128)
    for line in text[2:]:
        if not line:
            continue
        j_s, k_s, re_s, im_s = line.split(",")
        coeff[row_of[int(j_s)], col_of[int(k_s)]] = complex(float(re_s), float(im_s))
    return t, SpectralField(grid, parity, coeff)


def save_state(state: FlowState, directory, basename):
    """Write one snapshot as <basename>.omega.csv and <basename>.theta.csv."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, f in (("omega", state.omega), ("theta", state.theta)):
        p = directory / f"{basename}.{name}.csv"
        save_field_csv(f, state.t, p)
        paths.append(p)
    return paths


def load_state(directory, basename):
    directory = Path(directory)
    t_w, omega = load_field_csv(directory / f"{basename}.omega.csv")
    t_t, theta = load_field_csv(directory / f"{basename}.theta.csv")
    if t_w != t_t:
        raise ValueError("omega/theta snapshot times disagree")
    return FlowState(t_w, omega, theta)
