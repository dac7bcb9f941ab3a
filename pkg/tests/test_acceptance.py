"""Acceptance suite: one test per criterion, printed pass/fail lines.

Every criterion runs at its stated tolerance with its stated parameters.

Two clauses are KNOWN SPEC DEFECTS and fail honestly (see the decisions
ledger for the full analysis): the rate-fit windows of criteria 1 and 8
start at t = 10 while the linearized pair at nu = 1 has an intrinsic
spectral transient of duration nu (pi^2 + xi^2)^2 ~ 97 (the decay envelope
the source analysis itself derives is e^{-xi^2 t / (nu p^2)}), so the
fitted log-log slopes over [10, 1e4] (resp. [10, 4e3]) are biased flat by
up to 0.40 and no implementation can meet the +-0.08 / +-0.15 bands there.
Companion tests at the same tolerances on a transient-free window pass,
isolating the defect to the window placement.  Those two tests carry the
``spec_defect`` marker; deselect with ``-m 'not spec_defect'`` to run the
attainable set.
"""

import math
import time

import numpy as np
import pytest

from stripflow.analysis import (
    kernel_decay_integral,
    kernel_decay_integral_polar,
    nu_star,
    nu_star_grid_search,
    continuum_linear_decay,
    truncation_honesty_tmax,
    verify_symbol_bounds,
)
from stripflow.config import parse_config, serialize_config
from stripflow.diagnostics import (
    DecayCurve,
    NormId,
    energy_report,
    fit_rate,
    l2_inner,
    norm,
    theorem_suite,
)
from stripflow.fields import (
    FlowState,
    InitialProfile,
    Parity,
    ProfileComponent,
    SpectralField,
    StripGrid,
    random_field,
)
from stripflow.operators import (
    derivative_x,
    derivative_y,
    neg_laplacian,
    poisson_inverse,
    velocity_from_vorticity,
    vorticity_from_velocity,
)
from stripflow.oracles import pair_reference, relative_gap
from stripflow.propagators import (
    pair_values,
    propagate_linear_pair,
    sigma_lambda,
)
from stripflow.solver import (
    StepperConfig,
    make_initial_data,
    nonlinear_term,
    run_trajectory,
    step,
)
from stripflow.transforms import quadrature_l2, to_physical, to_spectral

PROFILE = InitialProfile(theta=(ProfileComponent(k=1, amplitude=1.0),))

#: criterion-1 ladder: (field, norm, expected exponent)
CRITERION_1_ROWS = (
    ("theta", NormId.sobolev(4), -0.25),
    ("theta", NormId.l1hat(), -0.5),
    ("theta", NormId.l1hat(weight="kpi"), -0.5),
    ("theta", NormId.l1hat(weight="xi"), -1.0),
    ("omega", NormId.l2hat(), -0.75),
    ("omega", NormId.l2hat(weight="xi"), -1.25),
    ("theta", NormId.l2hat(weight="xi2"), -1.25),
)


def report(tag, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {tag}: {status}{' - ' + detail if detail else ''}")


def ladder_outcomes(nu, window, per_decade=12):
    t0, t1 = window
    n = int(round(per_decade * math.log10(t1 / t0))) + 1
    times = np.logspace(math.log10(t0), math.log10(t1), n)
    norms = [(field, nid) for field, nid, _ in CRITERION_1_ROWS]
    curves = continuum_linear_decay(PROFILE, nu, norms, times)
    rows = []
    for curve, (_, _, expected) in zip(curves, CRITERION_1_ROWS):
        fit = fit_rate(curve, window)
        rows.append((curve.label, fit.exponent, expected, fit.r_squared))
    return rows


class TestCriterion1LinearDecayLadder:
    @pytest.mark.spec_defect
    def test_1_continuum_ladder_as_pinned(self):
        """Pinned configuration: nu = 1 and fit window [10, 1e4].

        Fails by construction: the window overlaps the nu p^2 ~ 97
        transient (see module docstring and the decisions ledger).
        """
        start = time.perf_counter()
        rows = ladder_outcomes(nu=1.0, window=(10.0, 1e4))
        elapsed = time.perf_counter() - start
        failures = []
        for label, exponent, expected, r2 in rows:
            if abs(exponent - expected) > 0.08 or r2 < 0.98:
                failures.append(
                    f"{label}: fitted {exponent:+.3f} vs {expected:+.2f}, r2={r2:.3f}"
                )
        ok = not failures and elapsed <= 120.0
        report("1 (continuum decay ladder, pinned nu=1 window [10,1e4])", ok,
               "; ".join(failures))
        assert elapsed <= 120.0
        assert not failures, failures

    def test_1c_companion_ladder_on_transient_free_window(self):
        """Same tolerances pass once the window clears the transient."""
        start = time.perf_counter()
        rows = ladder_outcomes(nu=1.0, window=(1e3, 1e6))
        elapsed = time.perf_counter() - start
        for label, exponent, expected, r2 in rows:
            assert abs(exponent - expected) <= 0.08, (label, exponent, expected)
            assert r2 >= 0.98, (label, r2)
        assert elapsed <= 120.0
        report("1c (companion: same ladder, window [1e3,1e6])", True,
               "all seven exponents within ±0.08, r2 >= 0.98")


class TestCriterion2PerModeOracle:
    def test_2_closed_form_vs_adaptive_ode(self):
        """10^3 random modes vs stiff adaptive integration, both systems."""
        from stripflow.oracles import damped_wave_reference

        start = time.perf_counter()
        rng = np.random.default_rng(42)
        star = nu_star()
        times = np.array([0.1, 1.0, 10.0, 100.0])
        worst_pair = 0.0
        worst_phi = 0.0
        for trial in range(1000):
            xi = float(rng.uniform(-50.0, 50.0))
            k = int(rng.integers(1, 33))
            nu = (0.01, star, 1.0)[rng.integers(0, 3)]
            y0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            scale0 = float(np.linalg.norm(y0))
            ref = pair_reference(xi, k, nu, y0, times)
            p, sigma, lam_p, lam_m = sigma_lambda(np.array([xi]), k, nu)
            l1s, l2s = [], []
            for i, t in enumerate(times):
                l1, l2 = pair_values(nu * p, sigma, t, lam=(lam_p, lam_m))
                l1s.append(l1[0])
                l2s.append(l2[0])
                m = np.array([
                    [l1[0] - 0.5 * nu * p[0] * l2[0], 1j * xi * l2[0]],
                    [1j * xi / p[0] * l2[0], l1[0] + 0.5 * nu * p[0] * l2[0]],
                ])
                worst_pair = max(worst_pair, relative_gap(m @ y0, ref[i], scale0))
            # the scalar damped-wave system, every 10th mode (it shares the
            # stiffness profile, so a subsample keeps the runtime budget)
            if trial % 10 == 0:
                phi0, phi1 = complex(y0[0]), complex(y0[1])
                ref_w = damped_wave_reference(xi, k, nu, phi0, phi1, times)
                for i in range(len(times)):
                    phi = l1s[i] * phi0 + l2s[i] * (
                        0.5 * nu * p[0] * phi0 + phi1
                    )
                    worst_phi = max(
                        worst_phi, relative_gap([phi], [ref_w[i, 0]], scale0)
                    )
        elapsed = time.perf_counter() - start
        ok = worst_pair <= 1e-8 and worst_phi <= 1e-8 and elapsed <= 60.0
        report("2 (per-mode ODE oracle equivalence)", ok,
               f"max rel gap pair {worst_pair:.2e}, damped-wave {worst_phi:.2e}, "
               f"{elapsed:.1f}s")
        assert worst_pair <= 1e-8
        assert worst_phi <= 1e-8
        assert elapsed <= 60.0


class TestCriterion3SigmaDegeneracy:
    def test_3_l2_continuity_through_sigma_zero(self):
        nu, k, t = 0.01, 1, 0.1
        xi = np.arange(0.10, 0.20, 1e-6)
        p, sigma, lam_p, lam_m = sigma_lambda(xi, k, nu)
        radicand = (nu * p) ** 2 - 4.0 * xi**2 / p
        assert radicand.min() < 0 < radicand.max()
        _, l2 = pair_values(nu * p, sigma, t, lam=(lam_p, lam_m))
        max_jump = float(np.abs(np.diff(l2)).max())
        ok = max_jump <= 1e-9
        report("3 (sigma-degeneracy stability)", ok, f"max jump {max_jump:.2e}")
        assert ok


class TestCriterion4NuStar:
    def test_4_critical_viscosity(self):
        closed = nu_star() ** 2
        grid_value, _, k_at = nu_star_grid_search()
        delta = abs(grid_value - closed)
        ok = (
            closed == pytest.approx(16.0 / (27.0 * math.pi**4), rel=1e-15)
            and delta <= 1e-9
            and 0.0 < closed < 1.0
            and k_at == 1
        )
        report("4 (critical viscosity nu*)", ok,
               f"nu*^2 = {closed:.9e}, grid delta {delta:.1e}")
        assert ok


class TestCriterion5KernelIntegral:
    def test_5_kernel_decay(self):
        ts = np.logspace(2, 6, 33)
        vals = np.array([kernel_decay_integral(t) for t in ts])
        fit = fit_rate(DecayCurve(ts, vals, "kernel"), (1e2, 1e6))
        scaled = vals * np.sqrt(ts)
        ratio = float(scaled.max() / scaled.min())
        cross = abs(kernel_decay_integral_polar(1e4) - kernel_decay_integral(1e4))
        cross_rel = cross / kernel_decay_integral(1e4)
        ok = abs(fit.exponent + 0.5) <= 0.05 and ratio <= 3.0 and cross_rel <= 1e-6
        report("5 (kernel-decay integral)", ok,
               f"slope {fit.exponent:+.4f}, sqrt-t ratio {ratio:.3f}, "
               f"polar cross-check {cross_rel:.1e}")
        assert abs(fit.exponent + 0.5) <= 0.05
        assert ratio <= 3.0
        assert cross_rel <= 1e-6


class TestCriterion6SymbolBounds:
    def test_6_envelopes_hold_with_stable_constants(self):
        star = nu_star()
        details = []
        all_ok = True
        for nu in (0.01, 1.0):
            rng = np.random.default_rng(1234)
            for region in (1, 2, 3, 4):
                rep = verify_symbol_bounds(nu, region, 500, rng)
                if rep.empty:
                    if nu >= star and region >= 3:
                        details.append(f"nu={nu} I{region}: empty (as asserted)")
                    else:
                        details.append(f"nu={nu} I{region}: empty")
                    continue
                finite = all(np.isfinite(c) for c in rep.constants.values())
                all_ok &= finite and rep.stable
                worst = max(rep.constants.values())
                details.append(
                    f"nu={nu} I{region}: C<=~{worst:.2f} "
                    f"{'stable' if rep.stable else 'UNSTABLE'}"
                )
        # at nu = 1 >= nu*, the oscillatory regions must be empty on samples
        rng = np.random.default_rng(99)
        for region in (3, 4):
            rep = verify_symbol_bounds(1.0, region, 500, rng)
            all_ok &= rep.empty
        report("6 (symbol envelope bounds)", all_ok, "; ".join(details))
        assert all_ok


class TestCriterion7ExactCancellations:
    GRID = StripGrid(half_width_lx=4.0 * math.pi, nx=64, ny=8, nu=0.25)

    def _band_state(self, rng, amplitude=1.0):
        jmax = self.GRID.nx // 3 - 1
        kmax = 2 * self.GRID.ny // 3 - 1
        return FlowState(
            0.0,
            random_field(self.GRID, Parity.ODD, rng, amplitude, kmax=kmax, jmax=jmax),
            random_field(self.GRID, Parity.ODD, rng, amplitude, kmax=kmax, jmax=jmax),
        )

    def test_7_discrete_identities(self):
        rng = np.random.default_rng(2718)
        state = self._band_state(rng)

        # B3 cancellation on snapshots
        rep3 = energy_report(
            [FlowState(t, state.omega, state.theta) for t in (0.0, 0.5, 1.0)],
            self.GRID.nu,
        )
        b3_rel = float(np.abs(rep3.b3).max()) / rep3.energy.max()

        # transport skew-symmetry
        n_w, n_th = nonlinear_term(state)
        skew_w = abs(l2_inner(n_w, state.omega)) / l2_inner(state.omega, state.omega)
        skew_th = abs(l2_inner(n_th, state.theta)) / l2_inner(state.theta, state.theta)

        # divergence and curl residuals
        u1, u2 = velocity_from_vorticity(state.omega)
        scale = np.abs(state.omega.coeff).max()
        div = np.abs((derivative_x(u1) + derivative_y(u2)).coeff).max() / scale
        curl = np.abs(
            vorticity_from_velocity(u1, u2).coeff - state.omega.coeff
        ).max() / scale

        # linear energy law with second-order refinement
        def residual(n):
            ts = np.linspace(0.0, 2.0, n)
            omega0 = random_field(self.GRID, Parity.ODD,
                                  np.random.default_rng(5), kmax=1, jmax=2)
            theta0 = random_field(self.GRID, Parity.ODD,
                                  np.random.default_rng(6), kmax=1, jmax=2)
            traj = [propagate_linear_pair(omega0, theta0, t) for t in ts]
            return energy_report(traj, self.GRID.nu).residual_linear

        res_fine = residual(4001)
        res_coarse = residual(2001)
        second_order = res_coarse / res_fine

        ok = (
            b3_rel <= 1e-10
            and skew_w <= 1e-10
            and skew_th <= 1e-10
            and div <= 1e-13
            and curl <= 1e-13
            and res_fine <= 1e-6
            and 2.5 <= second_order <= 6.0
        )
        report("7 (exact cancellations)", ok,
               f"B3 {b3_rel:.1e}, skew {max(skew_w, skew_th):.1e}, div {div:.1e}, "
               f"curl {curl:.1e}, energy residual {res_fine:.1e} "
               f"(refinement x{second_order:.1f})")
        assert b3_rel <= 1e-10
        assert skew_w <= 1e-10 and skew_th <= 1e-10
        assert div <= 1e-13 and curl <= 1e-13
        assert res_fine <= 1e-6
        assert 2.5 <= second_order <= 6.0


@pytest.fixture(scope="module")
def pinned_nonlinear_run():
    """Criterion 8's pinned trajectory, shared across its clauses."""
    start = time.perf_counter()
    grid = StripGrid(half_width_lx=200.0 * math.pi, nx=1024, ny=32, nu=1.0)
    profile = InitialProfile(theta=(ProfileComponent(k=1, amplitude=1e-4),))
    state0, _ = make_initial_data(profile, grid)
    t_end = truncation_honesty_tmax(grid)  # 4000 at the pinned parameters
    samples = np.unique(np.concatenate([[0.0], np.logspace(1.0, math.log10(t_end), 32)]))
    result = run_trajectory(state0, StepperConfig(dt=0.5), t_end, samples)
    elapsed = time.perf_counter() - start
    assert result.completed, result.failure
    return state0, result, t_end, elapsed


class TestCriterion8NonlinearSolver:
    def test_8a_equilibrium_is_machine_exact_fixed_point(self):
        grid = StripGrid(half_width_lx=20.0 * math.pi, nx=64, ny=8, nu=1.0)
        state = FlowState(
            0.0,
            SpectralField.zeros(grid, Parity.ODD),
            SpectralField.zeros(grid, Parity.ODD),
        )
        for _ in range(3):
            state = step(state, StepperConfig(dt=0.25))
        ok = bool(
            np.all(state.omega.coeff == 0.0) and np.all(state.theta.coeff == 0.0)
        )
        report("8a (equilibrium machine-exact)", ok)
        assert ok

    def test_8b_strang_rk2_second_order(self):
        grid = StripGrid(half_width_lx=4.0 * math.pi, nx=48, ny=8, nu=0.5)
        rng = np.random.default_rng(7)
        jmax, kmax = grid.nx // 3 - 1, 2 * grid.ny // 3 - 1
        state0 = FlowState(
            0.0,
            random_field(grid, Parity.ODD, rng, 0.05, kmax=kmax, jmax=jmax),
            random_field(grid, Parity.ODD, rng, 0.05, kmax=kmax, jmax=jmax),
        )

        def final(dt):
            s = state0
            cfg = StepperConfig(dt=dt)
            for _ in range(int(round(1.0 / dt))):
                s = step(s, cfg)
            return s

        ref = final(1.0 / 512.0)

        def err(dt):
            s = final(dt)
            return math.sqrt(
                float(np.sum(np.abs(s.omega.coeff - ref.omega.coeff) ** 2))
                + float(np.sum(np.abs(s.theta.coeff - ref.theta.coeff) ** 2))
            )

        order = math.log2(err(1.0 / 32.0) / err(1.0 / 64.0))
        ok = abs(order - 2.0) <= 0.2
        report("8b (strang-rk2 self-convergence)", ok, f"order {order:.3f}")
        assert ok

    def test_8c_linearization_error_scales_as_eps_squared(self):
        grid = StripGrid(half_width_lx=4.0 * math.pi, nx=48, ny=8, nu=0.5)

        def gap(eps):
            rng = np.random.default_rng(11)
            jmax, kmax = grid.nx // 3 - 1, 2 * grid.ny // 3 - 1
            state0 = FlowState(
                0.0,
                random_field(grid, Parity.ODD, rng, eps, kmax=kmax, jmax=jmax),
                random_field(grid, Parity.ODD, rng, eps, kmax=kmax, jmax=jmax),
            )
            s = state0
            cfg = StepperConfig(dt=0.01)
            for _ in range(100):
                s = step(s, cfg)
            lin = propagate_linear_pair(state0.omega, state0.theta, 1.0)
            return math.sqrt(
                float(np.sum(np.abs(s.omega.coeff - lin.omega.coeff) ** 2))
                + float(np.sum(np.abs(s.theta.coeff - lin.theta.coeff) ** 2))
            )

        ratio = gap(1e-4) / gap(5e-5)
        ok = abs(ratio - 4.0) <= 0.5
        report("8c (linearization error ~ eps^2)", ok, f"halving ratio {ratio:.3f}")
        assert ok

    @pytest.mark.spec_defect
    def test_8d_theorem_ladder_on_pinned_honesty_window(self, pinned_nonlinear_run):
        """Pinned window [10, 4e3] at nu = 1: same transient defect as 1."""
        state0, result, t_end, elapsed = pinned_nonlinear_run
        results = theorem_suite(result.states, window=(10.0, t_end))
        failures = []
        for curve, fit, expected in results:
            if abs(fit.exponent - expected) > 0.15:
                failures.append(
                    f"{curve.label}: fitted {fit.exponent:+.3f} vs {expected:+.2f}"
                )
        ok = not failures and elapsed <= 1800.0
        report("8d (theorem ladder, pinned truncated run)", ok, "; ".join(failures))
        assert elapsed <= 1800.0
        assert not failures, failures

    def test_8e_companion_trajectory_tracks_exact_linear_pair(
        self, pinned_nonlinear_run
    ):
        """The pinned run reproduces the truncated-linear ladder pointwise.

        At eps = 1e-4 the nonlinear correction is O(eps) relative, so every
        ladder norm along the trajectory must match the exact linear
        evolution to a small multiple of eps; this is the attainable desk
        form of the small-data decay statement on the honesty window.
        """
        state0, result, t_end, elapsed = pinned_nonlinear_run
        times = np.array([s.t for s in result.states if s.t > 0])
        lin_states = [
            propagate_linear_pair(state0.omega, state0.theta, t) for t in times
        ]
        got = theorem_suite(result.states, window=(10.0, t_end))
        ref = theorem_suite(lin_states, window=(10.0, t_end))
        worst = 0.0
        for (curve_g, _, _), (curve_r, _, _) in zip(got, ref):
            sel = curve_g.times > 0
            gap = np.abs(curve_g.values[sel] - curve_r.values) / curve_r.values
            worst = max(worst, float(gap.max()))

        # small-data boundedness: the temperature H4 surrogate never grows
        # beyond a small multiple of its initial size along the run
        h4 = [norm(s.theta, NormId.sobolev(4)) for s in result.states]
        bounded = max(h4) <= 10.0 * h4[0]

        ok = worst <= 1e-2 and bounded and elapsed <= 1800.0
        report("8e (companion: nonlinear tracks exact linear)", ok,
               f"max ladder rel gap {worst:.2e}, theta-H4 stays <= "
               f"{max(h4) / h4[0]:.3f}x initial, wall {elapsed:.0f}s")
        assert ok

    def test_8_runtime_within_budget(self, pinned_nonlinear_run):
        _, _, _, elapsed = pinned_nonlinear_run
        report("8 (runtime budget)", elapsed <= 1800.0, f"{elapsed:.0f}s <= 1800s")
        assert elapsed <= 1800.0


class TestCriterion9Infrastructure:
    def test_9_infrastructure(self, tmp_path):
        grid = StripGrid(half_width_lx=20.0 * math.pi, nx=64, ny=8, nu=1.0)
        rng = np.random.default_rng(31415)

        # transform round trips
        worst_rt = 0.0
        for parity in (Parity.ODD, Parity.EVEN):
            f = random_field(grid, parity, rng)
            back = to_spectral(to_physical(f))
            worst_rt = max(
                worst_rt,
                float(np.abs(back.coeff - f.coeff).max() / np.abs(f.coeff).max()),
            )

        # Parseval
        f = random_field(grid, Parity.ODD, rng)
        spectral = norm(f, NormId.l2hat())
        physical = quadrature_l2(to_physical(f))
        parseval = abs(spectral - physical) / spectral

        # Poisson residual
        g = random_field(grid, Parity.ODD, rng)
        poisson = float(
            np.abs(neg_laplacian(poisson_inverse(g)).coeff - g.coeff).max()
            / np.abs(g.coeff).max()
        )

        # config round trip
        cfg = parse_config(
            "experiment = symbol-bounds\nseed = 5\nbounds.samples = 40\n"
            "bounds.nus = 0.01\n"
        )
        config_ok = parse_config(serialize_config(cfg)) == cfg

        # determinism: identical config + seed gives bit-identical CSV
        from stripflow.experiments import run

        cfg_a = parse_config(
            "experiment = symbol-bounds\nseed = 5\nbounds.samples = 40\n"
            f"bounds.nus = 0.01\noutput_dir = {tmp_path / 'a'}\n"
        )
        cfg_b = parse_config(
            "experiment = symbol-bounds\nseed = 5\nbounds.samples = 40\n"
            f"bounds.nus = 0.01\noutput_dir = {tmp_path / 'b'}\n"
        )
        assert run(cfg_a) == 0 and run(cfg_b) == 0
        deterministic = all(
            (tmp_path / "a" / p.name).read_bytes() == p.read_bytes()
            for p in (tmp_path / "b").glob("*.csv")
        )

        ok = (
            worst_rt <= 1e-12
            and parseval <= 1e-10
            and poisson <= 1e-13
            and config_ok
            and deterministic
        )
        report("9 (infrastructure)", ok,
               f"roundtrip {worst_rt:.1e}, parseval {parseval:.1e}, "
               f"poisson {poisson:.1e}, config/determinism "
               f"{config_ok and deterministic}")
        assert worst_rt <= 1e-12
        assert parseval <= 1e-10
        assert poisson <= 1e-13
        assert config_ok
        assert deterministic
