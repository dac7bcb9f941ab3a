"""Norms, decay-rate fitting and energy-identity bookkeeping.

Spectral norms use the uniform quadrature weight dxi = pi/Lx of the
coefficient convention (see fields module):

    l2hat(f) = sqrt( sum |w(xi,k) coeff|^2 dxi )
    l1hat(f) = sum |w(xi,k) coeff| dxi

with the multiplier w drawn from {1, xi, xi^2, k pi, xi k pi} or the
Sobolev weight (1 + xi^2 + pi^2 k^2)^{m/2}.  l1hat of a field dominates its
sup norm, so it serves as the L-infinity surrogate in the decay ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, WindowTooShort
from .fields import Parity, SpectralField, laplace_symbol, xi_values, y_wavenumbers
from .operators import poisson_inverse
from .transforms import physical_max

SEMINORM_WEIGHTS = ("1", "xi", "xi2", "kpi", "xi_kpi")


@dataclass(frozen=True)
class NormId:
    """Identifier of a norm: kind in {l2hat, l1hat, sobolev_hm, linf}.

    ``weight`` applies a frequency multiplier to the hat-norms (seminorms
    such as the d/dx surrogate ``xi``); ``m`` is the Sobolev order.
    """

    kind: str
    m: int = 0
    weight: str = "1"

    def __post_init__(self):
        if self.kind not in ("l2hat", "l1hat", "sobolev_hm", "linf"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.weight not in SEMINORM_WEIGHTS:
            raise ValueError(f"unknown weight {self.weight!r}")
        if self.m < 0:
            raise ValueError("Sobolev order m must be >= 0")

    @classmethod
    def l2hat(cls, weight="1"):
        return cls("l2hat", weight=weight)

    @classmethod
    def l1hat(cls, weight="1"):
        return cls("l1hat", weight=weight)

    @classmethod
    def sobolev(cls, m, weight="1"):
        return cls("sobolev_hm", m=m, weight=weight)

    @classmethod
    def linf(cls):
        return cls("linf")

    @property
    def label(self):
        base = f"h{self.m}" if self.kind == "sobolev_hm" else self.kind
        return base if self.weight == "1" else f"{base}_{self.weight}"


def seminorm_weight(weight, xi, kpi):
    """Evaluate a seminorm multiplier on broadcastable (xi, k pi) arrays."""
    if weight == "1":
        return np.ones(np.broadcast(xi, kpi).shape)
    if weight == "xi":
        return np.abs(xi) * np.ones_like(kpi)
    if weight == "xi2":
        return xi**2 * np.ones_like(kpi)
    if weight == "kpi":
        return np.ones_like(xi) * kpi
    if weight == "xi_kpi":
        return np.abs(xi) * kpi
    raise ValueError(f"unknown weight {weight!r}")


def _weight_array(grid, parity, nid):
    xi = xi_values(grid)[:, None]
    kpi = math.pi * y_wavenumbers(grid, parity)[None, :]
    base = seminorm_weight(nid.weight, xi, kpi)
    if nid.kind == "sobolev_hm":
        base = base * (1.0 + xi**2 + kpi**2) ** (nid.m / 2.0)
    return base


def norm(f: SpectralField, nid: NormId) -> float:
    """Evaluate one norm of a spectral field.

    linf is the max of |f| on a 2x-refined collocation grid (the collocation
    max alone underestimates the true sup for band-limited fields).
    """
    if nid.kind == "linf":
        return physical_max(f, refine=2)
    w = _weight_array(f.grid, f.parity, nid)
    weighted = np.abs(w * f.coeff)
    if nid.kind == "l1hat":
        return float(weighted.sum() * f.grid.dxi)
    return float(math.sqrt((weighted**2).sum() * f.grid.dxi))


def l2_inner(f: SpectralField, g: SpectralField) -> float:
    """L2 inner product of two same-parity real fields, evaluated spectrally."""
    if f.grid != g.grid:
        raise GridMismatchError("inner product across grids")
    if f.parity is not g.parity:
        raise ValueError("inner product requires matching parity")
    return float(np.real(np.sum(f.coeff * np.conj(g.coeff))) * f.grid.dxi)


def grad_inner(f: SpectralField, g: SpectralField) -> float:
    """<grad f, grad g>; diagonal with weight p = xi^2 + pi^2 k^2."""
    if f.grid != g.grid:
        raise GridMismatchError("inner product across grids")
    p = laplace_symbol(f.grid, f.parity)
    return float(np.real(np.sum(p * f.coeff * np.conj(g.coeff))) * f.grid.dxi)


@dataclass
class DecayCurve:
    """A norm sampled against time."""

    times: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times and values must be matching 1-d arrays")
        if len(self.times) and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("curve values must be finite")


@dataclass(frozen=True)
class RateFit:
    """Algebraic decay exponent fitted on log-log axes."""

    exponent: float
    intercept: float
    r_squared: float
    window: tuple

    def as_dict(self):
        return {
            "exponent": self.exponent,
            "intercept": self.intercept,
            "r2": self.r_squared,
            "t_min": self.window[0],
            "t_max": self.window[1],
        }


def fit_rate(curve: DecayCurve, window) -> RateFit:
    """Least-squares line through (log t, log value) inside the window.

    The slope is computed from pairwise log-ratios, which makes the
    exponent bit-identical under exact rescaling of the values (the
    intercept absorbs the scale).

    Raises:
        ValueError: fewer than 8 samples in the window, or non-positive
            values (underflow or a zero field).
    """
    t_min, t_max = window
    if not t_min < t_max:
        raise ValueError("window must satisfy t_min < t_max")
    mask = (curve.times >= t_min) & (curve.times <= t_max)
    if int(mask.sum()) < 8:
        raise ValueError(
            f"need >= 8 samples in window [{t_min:g}, {t_max:g}], "
            f"have {int(mask.sum())}"
        )
    ts = curve.times[mask]
    vs = curve.values[mask]
    if np.any(vs <= 0):
        raise ValueError("non-positive values in fit window")

    x = np.log(ts)
    num = 0.0
    den = 0.0
    n = len(ts)
    for i in range(n - 1):
        dx = x[i + 1 :] - x[i]
        dy = np.log(vs[i + 1 :] / vs[i])
        num += float(np.sum(dx * dy))
        den += float(np.sum(dx * dx))
    slope = num / den

    y = np.log(vs)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - intercept - slope * x
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(slope, intercept, r2, (float(t_min), float(t_max)))


@dataclass
class EnergyReport:
    """Energy-identity bookkeeping along a trajectory.

    E(t) = |grad theta|^2 + |omega|^2 obeys
    dE/dt = -2 nu |grad omega|^2 + 2 (B1 + B2), with B3 = 0 exactly.
    Integrals over the snapshot window use composite trapezoid.
    """

    times: np.ndarray
    energy: np.ndarray
    grad_omega_sq: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    b3: np.ndarray
    delta_energy: float
    dissipation: float
    flux: float

    @property
    def residual_linear(self):
        """|dE + dissipation| relative to the balance scale (no-flux form)."""
        scale = max(abs(self.delta_energy), self.dissipation, 1e-300)
        return abs(self.delta_energy + self.dissipation) / scale

    @property
    def residual_full(self):
        """|dE + dissipation - flux| relative to the balance scale."""
        scale = max(abs(self.delta_energy), self.dissipation, 1e-300)
        return abs(self.delta_energy + self.dissipation - self.flux) / scale


def energy_report(traj, nu, nonlinear_terms=None) -> EnergyReport:
    """Energy, dissipation, transport flux and the exact-cancellation term B3.

    Args:
        traj: list of FlowState snapshots, uniformly spaced in time
        nu: viscosity used in the dissipation integral
        nonlinear_terms: optional callable state -> (N_omega, N_theta)
            matching the solver's discretization; when omitted the flux
            terms are reported as zero (exact for linear trajectories).

    Raises:
        ValueError: fewer than 3 snapshots or non-uniform spacing.
        GridMismatchError: snapshots on different grids.
    """
    if len(traj) < 3:
        raise ValueError("need at least 3 snapshots")
    times = np.array([s.t for s in traj])
    h = np.diff(times)
    if np.any(h <= 0) or np.abs(h - h[0]).max() > 1e-9 * h[0]:
        raise ValueError("snapshots must be uniformly spaced in time")
    grid = traj[0].grid
    for s in traj:
        if s.grid != grid:
            raise GridMismatchError("snapshots on different grids")

    n = len(traj)
    energy = np.empty(n)
    grad_omega_sq = np.empty(n)
    b1 = np.zeros(n)
    b2 = np.zeros(n)
    b3 = np.empty(n)
    for i, s in enumerate(traj):
        energy[i] = grad_inner(s.theta, s.theta) + l2_inner(s.omega, s.omega)
        grad_omega_sq[i] = grad_inner(s.omega, s.omega)
        # B3 = <grad d/dx (-Lap)^{-1} omega, grad theta> + <d/dx theta, omega>
        xi = xi_values(grid)[:, None]
        stream_dx = 1j * xi * poisson_inverse(s.omega).coeff
        term1 = np.real(
            np.sum(laplace_symbol(grid, Parity.ODD) * stream_dx * np.conj(s.theta.coeff))
        )
        term2 = np.real(np.sum(1j * xi * s.theta.coeff * np.conj(s.omega.coeff)))
        b3[i] = (term1 + term2) * grid.dxi
        if nonlinear_terms is not None:
            n_omega, n_theta = nonlinear_terms(s)
            b1[i] = -l2_inner(n_omega, s.omega)
            b2[i] = -grad_inner(n_theta, s.theta)

    w = np.full(n, h[0])
    w[0] = w[-1] = 0.5 * h[0]
    dissipation = 2.0 * nu * float(np.sum(w * grad_omega_sq))
    flux = 2.0 * float(np.sum(w * (b1 + b2)))
    return EnergyReport(
        times=times,
        energy=energy,
        grad_omega_sq=grad_omega_sq,
        b1=b1,
        b2=b2,
        b3=b3,
        delta_energy=float(energy[-1] - energy[0]),
        dissipation=dissipation,
        flux=flux,
    )


#: The decay ladder asserted by the main stability theorem, as
#: (label, norm of which field, expected exponent).  The sup norms are
#: measured through their summable-coefficient surrogate l1hat.
THEOREM_LADDER = (
    ("theta_h4", "theta", NormId.sobolev(4), -0.25),
    ("omega_h2", "omega", NormId.sobolev(2), -0.75),
    ("dx_theta_h2", "theta", NormId.sobolev(2, weight="xi"), -0.75),
    ("dx_omega_l2", "omega", NormId.l2hat(weight="xi"), -1.25),
    ("dxx_theta_l2", "theta", NormId.l2hat(weight="xi2"), -1.25),
    ("theta_linf_surrogate", "theta", NormId.l1hat(), -0.5),
    ("dy_theta_linf_surrogate", "theta", NormId.l1hat(weight="kpi"), -0.5),
    ("dx_theta_linf_surrogate", "theta", NormId.l1hat(weight="xi"), -1.0),
    ("omega_linf_surrogate", "omega", NormId.l1hat(), -1.0),
)


def theorem_suite(traj, window=None, min_span=10.0):
    """Ladder norms along a trajectory with a rate fit per curve.

    Args:
        traj: list of FlowState snapshots (increasing t)
        window: (t_min, t_max) fit window; defaults to the snapshot span
        min_span: required ratio t_max/t_min (one decade by default)

    Returns:
        list of (DecayCurve, RateFit, expected_exponent) triples.

    Raises:
        WindowTooShort: window spans less than ``min_span`` in t.
    """
    times = np.array([s.t for s in traj])
    if window is None:
        positive = times[times > 0]
        window = (float(positive.min()), float(times.max()))
    t_min, t_max = window
    if not t_max >= min_span * t_min:
        raise WindowTooShort(min_span, t_max / t_min if t_min > 0 else math.inf)

    grid = traj[0].grid
    weights = {}
    for label, which, nid, _ in THEOREM_LADDER:
        kind = "l1" if nid.kind == "l1hat" else "l2"
        weights[label] = (_weight_array(grid, Parity.ODD, nid), kind)

    results = []
    for label, which, nid, expected in THEOREM_LADDER:
        w, kind = weights[label]
        vals = np.empty(len(traj))
        for i, s in enumerate(traj):
            c = s.theta.coeff if which == "theta" else s.omega.coeff
            weighted = np.abs(w * c)
            if kind == "l1":
                vals[i] = weighted.sum() * grid.dxi
            else:
                vals[i] = math.sqrt((weighted**2).sum() * grid.dxi)
        curve = DecayCurve(times, vals, label)
        fit = fit_rate(curve, window)
        results.append((curve, fit, expected))
    return results
