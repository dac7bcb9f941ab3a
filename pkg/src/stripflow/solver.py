"""Pseudo-spectral time integration of the full perturbation system.

The state (omega, theta) evolves by

    d/dt omega = nu Lap omega - u . grad omega + d/dx theta
    d/dt theta = -u . grad theta - u2
    u = (d/dy (-Lap)^{-1} omega, -d/dx (-Lap)^{-1} omega)

with slip walls enforced by sine parity.  Time stepping is Strang
splitting: a half step of the exact linear pair propagator, an explicit
substep of the pure transport terms (midpoint rule or classical RK4), and
a second linear half step.  The linear part is exact per mode, so the
scheme has no stiffness restriction; only the advective CFL bound limits
dt.  Transport products are formed pointwise on the shared collocation
grid and dealiased by the 2/3 rule in both directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CflViolation, NumericalBlowup
from .fields import (
    FlowState,
    InitialProfile,
    Parity,
    PhysicalField,
    SpectralField,
    StripGrid,
    hermitian_project,
    xi_index,
    xi_values,
)
from .operators import derivative_x, derivative_y, velocity_from_vorticity
from .propagators import pair_step_matrix
from .transforms import quadrature_l1, to_physical, to_spectral

SCHEMES = ("strang-rk2", "strang-rk4")


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping parameters."""

    dt: float
    cfl_safety: float = 0.8
    dealias_fraction: float = 2.0 / 3.0
    scheme: str = "strang-rk2"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must be in (0, 1]")
        if not 0 < self.dealias_fraction <= 1:
            raise ValueError("dealias_fraction must be in (0, 1]")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")


@dataclass
class TrajectoryResult:
    """Snapshots plus a completion flag; ``failure`` holds the abort reason."""

    states: list
    completed: bool
    failure: str | None = None


@lru_cache(maxsize=16)
def dealias_mask(grid: StripGrid, fraction: float):
    """Boolean keep-mask on the Odd lattice: |j| <= f nx/2 and k <= f ny."""
    j = np.abs(xi_index(grid))[:, None]
    k = np.arange(1, grid.ny + 1)[None, :]
    mask = (j <= fraction * grid.nx / 2.0) & (k <= fraction * grid.ny)
    mask.setflags(write=False)
    return mask


def nonlinear_term(state: FlowState, dealias_fraction=2.0 / 3.0):
    """Transport terms (u.grad omega, u.grad theta), dealiased, Odd parity.

    Factors are moved to the shared collocation nodes, multiplied
    pointwise and transformed back; the product of an Even and an Odd
    factor has an odd extension, so the outputs are sine fields with
    exactly zero wall rows.

    Raises:
        ParityError: a product failed the wall-row check in to_spectral
            (signals a parity bug upstream).
    """
    grid = state.grid
    u1, u2 = velocity_from_vorticity(state.omega)
    u1_g = to_physical(u1).values
    u2_g = to_physical(u2).values

    mask = dealias_mask(grid, dealias_fraction)
    out = []
    for f in (state.omega, state.theta):
        fx_g = to_physical(derivative_x(f)).values
        fy_g = to_physical(derivative_y(f)).values
        product = PhysicalField(grid, Parity.ODD, u1_g * fx_g + u2_g * fy_g)
        spec = to_spectral(product)
        spec.coeff *= mask
        out.append(spec)
    return out[0], out[1]


def admissible_dt(state: FlowState, cfg: StepperConfig) -> float:
    """Advective stability bound cfl_safety * min over directions of dx/|u|."""
    grid = state.grid
    u1, u2 = velocity_from_vorticity(state.omega)
    m1 = float(np.abs(to_physical(u1).values).max())
    m2 = float(np.abs(to_physical(u2).values).max())
    bound = math.inf
    if m1 > 0:
        bound = grid.dx / m1
    if m2 > 0:
        bound = min(bound, grid.dy / m2)
    return cfg.cfl_safety * bound


def _check_finite(state):
    for name, f in (("omega", state.omega), ("theta", state.theta)):
        bad = ~np.isfinite(f.coeff)
        if bad.any():
            idx = np.argwhere(bad)[0]
            j = int(xi_index(state.grid)[idx[0]])
            k = int(idx[1] + 1)
            raise NumericalBlowup(name, (j, k), state.t)


def _transport_rhs(grid, w_coeff, th_coeff, fraction):
    state = FlowState(
        0.0,
        SpectralField(grid, Parity.ODD, w_coeff),
        SpectralField(grid, Parity.ODD, th_coeff),
    )
    n_w, n_th = nonlinear_term(state, fraction)
    return -n_w.coeff, -n_th.coeff


def step(state: FlowState, cfg: StepperConfig) -> FlowState:
    """One Strang step: exact linear half, explicit transport, linear half.

    Raises:
        CflViolation: cfg.dt above the admissible advective step; the
            exception carries the admissible value.
        NumericalBlowup: non-finite coefficients after the step.
    """
    dt_adm = admissible_dt(state, cfg)
    if cfg.dt > dt_adm:
        raise CflViolation(cfg.dt, dt_adm)

    grid = state.grid
    m11, m12, m21, m22 = pair_step_matrix(grid, 0.5 * cfg.dt)

    w = m11 * state.omega.coeff + m12 * state.theta.coeff
    th = m21 * state.omega.coeff + m22 * state.theta.coeff

    f = cfg.dealias_fraction
    dt = cfg.dt
    if cfg.scheme == "strang-rk2":
        kw1, kt1 = _transport_rhs(grid, w, th, f)
        kw2, kt2 = _transport_rhs(grid, w + 0.5 * dt * kw1, th + 0.5 * dt * kt1, f)
        w = w + dt * kw2
        th = th + dt * kt2
    else:
        kw1, kt1 = _transport_rhs(grid, w, th, f)
        kw2, kt2 = _transport_rhs(grid, w + 0.5 * dt * kw1, th + 0.5 * dt * kt1, f)
        kw3, kt3 = _transport_rhs(grid, w + 0.5 * dt * kw2, th + 0.5 * dt * kt2, f)
        kw4, kt4 = _transport_rhs(grid, w + dt * kw3, th + dt * kt3, f)
        w = w + dt / 6.0 * (kw1 + 2 * kw2 + 2 * kw3 + kw4)
        th = th + dt / 6.0 * (kt1 + 2 * kt2 + 2 * kt3 + kt4)

    w_new = m11 * w + m12 * th
    th_new = m21 * w + m22 * th
    out = FlowState(
        state.t + dt,
        SpectralField(grid, Parity.ODD, w_new),
        SpectralField(grid, Parity.ODD, th_new),
    )
    _check_finite(out)
    return out


def run_trajectory(state0: FlowState, cfg: StepperConfig, t_end: float,
                   sample_times) -> TrajectoryResult:
    """Integrate to t_end, recording snapshots at step boundaries.

    Each requested sample time is rounded to the nearest step boundary;
    recorded snapshot times are the exact boundary times.  On a step
    failure the partial trajectory is returned with ``completed=False``
    and the failure message.
    """
    sample_times = np.asarray(sample_times, dtype=float)
    if np.any(np.diff(sample_times) <= 0):
        raise ValueError("sample_times must be strictly increasing")
    if len(sample_times) and sample_times[-1] > t_end + 1e-9:
        raise ValueError("sample_times must not exceed t_end")

    n_steps = int(round((t_end - state0.t) / cfg.dt))
    targets = sorted(
        {min(max(int(round((ts - state0.t) / cfg.dt)), 0), n_steps) for ts in sample_times}
    )
    states = []
    state = state0
    if targets and targets[0] == 0:
        states.append(state.copy())
        targets = targets[1:]
    try:
        for i in range(1, n_steps + 1):
            state = step(state, cfg)
            if targets and i == targets[0]:
                states.append(state)
                targets = targets[1:]
    except (CflViolation, NumericalBlowup) as exc:
        return TrajectoryResult(states, completed=False, failure=str(exc))
    return TrajectoryResult(states, completed=True)


def make_initial_data(profile: InitialProfile, grid: StripGrid):
    """Synthesize Odd-parity initial data from sine-row components.

    Every even-order wall derivative of a finite sine series vanishes
    identically, so the compatibility conditions hold by construction.

    Returns:
        (state, report): FlowState at t=0 plus a report dict with the
        grid-quadrature W^{m,1} surrogates (m=8 for theta, m=5 for omega)
        and L2 norms used in small-data bookkeeping.
    """
    xi = xi_values(grid)

    def synthesize(components):
        coeff = np.zeros(grid.coeff_shape(Parity.ODD), dtype=np.complex128)
        for c in components:
            if c.k > grid.ny:
                raise ValueError(f"component k={c.k} exceeds ny={grid.ny}")
            coeff[:, c.k - 1] += c.envelope(xi)
        coeff = hermitian_project(grid, coeff)
        return SpectralField(grid, Parity.ODD, coeff)

    theta = synthesize(profile.theta)
    omega = synthesize(profile.omega)
    state = FlowState(0.0, omega, theta)

    report = {
        "theta0_w81_surrogate": _wm1_surrogate(theta, 8),
        "omega0_w51_surrogate": _wm1_surrogate(omega, 5),
        "theta0_l2": math.sqrt(float(np.sum(np.abs(theta.coeff) ** 2)) * grid.dxi),
        "omega0_l2": math.sqrt(float(np.sum(np.abs(omega.coeff) ** 2)) * grid.dxi),
    }
    return state, report


def _wm1_surrogate(f, m):
    """Sum of grid-quadrature L1 norms of all derivatives up to order m."""
    total = 0.0
    fx = f
    for a in range(m + 1):
        fy = fx
        for b in range(m + 1 - a):
            total += quadrature_l1(to_physical(fy))
            fy = derivative_y(fy)
        fx = derivative_x(fx)
    return total
