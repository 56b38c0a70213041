"""End-to-end verification suite: twelve numbered checks, one per claim area.

Each check is a self-contained experiment graded against pinned numeric
bands; together they exercise every capability of the library (closed-form
integral identities, the traveling-profile family and its linearization,
the pole-dynamics ODE systems, the parameter-modulation laws, and the PDE
steppers).  A check returns a :class:`CheckResult` whose ``measures`` dict
carries the raw numbers so a red result is diagnosable from the report
alone.  ``run_all`` drives any subset; the ``check`` command-line verb and
``tests/test_acceptance.py`` are thin wrappers around it.

Checks 2 and 5 deliberately ignore any shared profile cache: their runtime
budgets (and grids) include the profile solves, so they always start cold.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .spectral import (
    Grid1D,
    SpectralField,
    apply_multiplier,
    conserved_triple,
    d_symbol,
    l2_norm,
    sobolev_norm,
)
from .profiles import (
    ProfileCache,
    appendix_a_oracle,
    nondegeneracy_det,
    q_beta_minus_q_plus_h_half,
    solve_rho_beta,
    tail_prediction,
)
from .szego import (
    SzegoTwoSolitonState,
    integrate_full,
    integrate_resonant,
    resonant_to_state,
    sobolev_growth,
)
from .modulation import (
    RegimeConfig,
    initial_data_t_minus,
    integrate_system,
    phase_subsystem_closed_form,
    regime_report,
)
from .evolution import (
    EvolutionConfig,
    flow_energy,
    run_with_diagnostics,
    step_halfwave,
    step_szego,
    synth_two_soliton,
    szego_soliton_data,
    traveling_wave_data,
)

__all__ = [
    "CheckResult",
    "ALL_CHECKS",
    "run_all",
    "check_integral_identities",
    "check_nondegeneracy_determinant",
    "check_profile_convergence_rate",
    "check_correction_profile_expansion",
    "check_tail_law",
    "check_pole_system_conservation",
    "check_resonant_linear_law",
    "check_cascade_growth_exponents",
    "check_perturbative_window_laws",
    "check_phase_closed_form",
    "check_soliton_persistence",
    "check_turbulent_growth_trend",
]

PI4 = math.pi**4

#: default working grid for profile-based checks
DEFAULT_N = 2**15
DEFAULT_LENGTH = 400.0

#: beta ladder shared by the convergence-rate checks
BETA_GRID = (0.9, 0.95, 0.99, 0.999)


@dataclass
class CheckResult:
    """Outcome of one numbered check."""

    check_id: int
    name: str
    passed: bool
    runtime: float
    measures: dict = field(default_factory=dict)
    details: str = ""

    def summary(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"[{flag}] check {self.check_id:2d} {self.name:<28s} "
                f"{self.runtime:7.1f} s  {self.details}")


def _default_cache() -> ProfileCache:
    return ProfileCache(Grid1D(DEFAULT_N, DEFAULT_LENGTH), tol=1e-9)


def _spatial_derivative(field: SpectralField) -> SpectralField:
    deriv = apply_multiplier(field, d_symbol())
    return SpectralField(field.grid, values=1j * deriv.values)


def _envelope(beta: float) -> float:
    eps = 1.0 - beta
    return math.sqrt(eps * abs(math.log(eps)))


# ---------------------------------------------------------------------------
# 1. closed-form integral identities
# ---------------------------------------------------------------------------

def check_integral_identities(cache: ProfileCache | None = None) -> CheckResult:
    """Six limit-profile integrals match their residue values to 1e-5."""
    t_start = time.perf_counter()
    grid = cache.grid if cache is not None else Grid1D(DEFAULT_N, DEFAULT_LENGTH)
    rows = appendix_a_oracle(grid)[:6]
    expected = [2 * math.pi, 2j * math.pi, 2 * math.pi,
                -4 * math.pi, 2j * math.pi, -2j * math.pi]
    targets_ok = all(
        complex(row["target"]) == complex(t) for row, t in zip(rows, expected)
    )
    max_err = max(row["abs_err"] for row in rows)
    runtime = time.perf_counter() - t_start
    passed = targets_ok and max_err < 1e-5 and runtime < 5.0
    return CheckResult(
        1, "integral-identities", passed, runtime,
        {"max_abs_err": max_err, "err_budget": 1e-5,
         "runtime_budget_s": 5.0, "targets_ok": targets_ok},
        f"max |value-target| = {max_err:.2e} over six identities "
        f"(budget 1e-05), runtime {runtime:.2f} s (budget 5 s)",
    )


# ---------------------------------------------------------------------------
# 2. nondegeneracy determinant
# ---------------------------------------------------------------------------

def check_nondegeneracy_determinant(
    cache: ProfileCache | None = None,
) -> CheckResult:
    """det of the 4x4 interaction matrix: near -pi^4, always negative.

    The runtime budget covers the profile solves, so this check always
    builds its own cold cache (the ``cache`` argument is ignored).
    """
    t_start = time.perf_counter()
    cold = _default_cache()
    dets = {}
    for beta in BETA_GRID:
        p = cold.get(beta)
        lo, hi = cold.neighbors(beta)
        dets[beta] = nondegeneracy_det(p, lo, hi)
    runtime = time.perf_counter() - t_start
    near_ok = abs(dets[0.999] + PI4) < 0.10 * PI4
    mid_ok = abs(dets[0.99] + PI4) < 0.25 * PI4
    sign_ok = all(d < 0 for d in dets.values())
    passed = near_ok and mid_ok and sign_ok and runtime < 120.0
    return CheckResult(
        2, "nondegeneracy-determinant", passed, runtime,
        {"det": {str(b): d for b, d in dets.items()},
         "target": -PI4,
         "rel_dev_0.999": abs(dets[0.999] + PI4) / PI4,
         "rel_dev_0.99": abs(dets[0.99] + PI4) / PI4,
         "runtime_budget_s": 120.0},
        f"det(0.999) = {dets[0.999]:.3f} vs -pi^4 = {-PI4:.3f} "
        f"(dev {abs(dets[0.999] + PI4) / PI4:.1%}, budget 10%); "
        f"det(0.99) dev {abs(dets[0.99] + PI4) / PI4:.1%} (budget 25%); "
        f"all signs negative: {sign_ok}; runtime {runtime:.0f} s "
        f"(budget 120 s)",
    )


# ---------------------------------------------------------------------------
# 3. profile convergence rate
# ---------------------------------------------------------------------------

def check_profile_convergence_rate(
    cache: ProfileCache | None = None,
) -> CheckResult:
    """Distance to the limit profile obeys the sqrt((1-b)|log(1-b)|) law."""
    t_start = time.perf_counter()
    if cache is None:
        cache = _default_cache()
    dists = [q_beta_minus_q_plus_h_half(cache.get(b)) for b in BETA_GRID]
    ratios = [d / _envelope(b) for d, b in zip(dists, BETA_GRID)]
    decreasing = all(a > b for a, b in zip(dists, dists[1:]))
    runtime = time.perf_counter() - t_start
    passed = max(ratios) <= 10.0 and decreasing
    return CheckResult(
        3, "profile-convergence-rate", passed, runtime,
        {"betas": list(BETA_GRID), "h_half_distance": dists,
         "envelope_ratio": ratios, "ratio_budget": 10.0,
         "decreasing": decreasing},
        f"envelope ratios {['%.2f' % r for r in ratios]} (budget 10), "
        f"distance decreasing in beta: {decreasing}",
    )


# ---------------------------------------------------------------------------
# 4. first-order correction profile
# ---------------------------------------------------------------------------

def check_correction_profile_expansion(
    cache: ProfileCache | None = None,
) -> CheckResult:
    """i*(correction profile) approaches Q + (i/2) dQ/dy at the same rate."""
    t_start = time.perf_counter()
    if cache is None:
        cache = _default_cache()
    errs = []
    for b in BETA_GRID:
        p = cache.get(b)
        rho = solve_rho_beta(p)
        dq = _spatial_derivative(p.field).values
        diff = SpectralField(
            p.grid, values=1j * rho.values - p.field.values - 0.5j * dq
        )
        errs.append(sobolev_norm(diff, 0.5))
    ratios = [e / _envelope(b) for e, b in zip(errs, BETA_GRID)]
    shrinking = all(a > b for a, b in zip(errs, errs[1:]))
    runtime = time.perf_counter() - t_start
    passed = max(ratios) <= 10.0 and shrinking
    return CheckResult(
        4, "correction-profile-expansion", passed, runtime,
        {"betas": list(BETA_GRID), "h_half_error": errs,
         "envelope_ratio": ratios, "ratio_budget": 10.0,
         "shrinking": shrinking},
        f"expansion errors {['%.3f' % e for e in errs]}, envelope ratios "
        f"{['%.2f' % r for r in ratios]} (budget 10), shrinking: {shrinking}",
    )


# ---------------------------------------------------------------------------
# 5. far-field tail law
# ---------------------------------------------------------------------------

def check_tail_law(cache: ProfileCache | None = None) -> CheckResult:
    """Tail ratio in [0.8, 1.2] on x in [20, 200]; quadratic-decay bound.

    Periodization wrecks tail comparisons near the domain edge, so this
    check solves its profile on its own wide grid (length 3200, n = 2^17);
    the supplied cache is ignored.  The point bound 2/((1-beta) x^2) is a
    line statement; on the periodic grid the wrap-around image inflates
    |Q| (by ~2x at x = length/2 where both images weigh equally), yet the
    bound still holds on all of [20, length/2] (measured margin 0.92 at
    the wrap), so it is graded on that whole range.
    """
    t_start = time.perf_counter()
    wide = ProfileCache(Grid1D(2**17, 3200.0), tol=1e-9)
    beta = 0.999
    p = wide.get(beta)
    grid = p.grid
    v = p.field.values

    # ratio against the closed-form prediction, nearest grid point per probe
    probes = np.arange(20.0, 200.0 + 0.5, 1.0)
    ratios = []
    for x_probe in probes:
        j = int(round((x_probe + grid.length / 2) / grid.dx))
        x = grid.x[j]
        pred = sum(
            tail_prediction(p, img)[0] for img in (x, x - grid.length)
        )
        ratios.append(abs(v[j]) / abs(pred))
    ratios = np.array(ratios)
    ratio_ok = bool(np.all((ratios >= 0.8) & (ratios <= 1.2)))

    # quadratic-decay point bound on [20, length/2]
    sel = grid.x >= 20.0
    bound = 2.0 / ((1.0 - beta) * grid.x[sel] ** 2)
    margin = np.abs(v[sel]) / bound
    bound_ok = bool(np.all(margin <= 1.0))

    runtime = time.perf_counter() - t_start
    passed = ratio_ok and bound_ok
    return CheckResult(
        5, "tail-law", passed, runtime,
        {"beta": beta, "ratio_min": float(ratios.min()),
         "ratio_max": float(ratios.max()), "ratio_band": [0.8, 1.2],
         "bound_margin_max": float(margin.max()),
         "bound_domain": [20.0, grid.length / 2],
         "grid": [grid.n, grid.length]},
        f"tail ratio in [{ratios.min():.3f}, {ratios.max():.3f}] on "
        f"x in [20, 200] (band [0.8, 1.2]); point bound margin max "
        f"{margin.max():.3f} (<= 1) out to x = {grid.length / 2:.0f}",
    )


# ---------------------------------------------------------------------------
# 6. pole-system conservation
# ---------------------------------------------------------------------------

def check_pole_system_conservation(
    cache: ProfileCache | None = None,
) -> CheckResult:
    """Generic two-pole run keeps K, C, M, D and the energy identity."""
    t_start = time.perf_counter()
    s0 = SzegoTwoSolitonState(
        alpha1=1.0 + 0.3j, alpha2=0.7 - 0.4j,
        kappa1=1.4, kappa2=0.8, x1=4.0, x2=-4.0,
    )
    traj = integrate_full(s0, 0.0, 50.0, tol=1e-12, n_out=201)
    drifts = traj.drift()
    max_drift = max(drifts.values())
    max_identity = max(c.identity_residual for c in traj.conserved)
    runtime = time.perf_counter() - t_start
    passed = max_drift < 1e-8 and max_identity < 1e-9 and runtime < 10.0
    return CheckResult(
        6, "pole-system-conservation", passed, runtime,
        {"drift": drifts, "drift_budget": 1e-8,
         "identity_residual_max": max_identity,
         "identity_budget": 1e-9, "runtime_budget_s": 10.0},
        f"max relative drift {max_drift:.2e} (budget 1e-08); max energy "
        f"identity residual {max_identity:.2e} (budget 1e-09); runtime "
        f"{runtime:.2f} s (budget 10 s)",
    )


# ---------------------------------------------------------------------------
# 7. resonant linear law
# ---------------------------------------------------------------------------

def check_resonant_linear_law(
    cache: ProfileCache | None = None,
) -> CheckResult:
    """X*nu falls linearly at rate -M K^2; escape speed and phase decay."""
    t_start = time.perf_counter()
    measures = {}
    ok = True
    for K, M in ((1.0, 2.0), (0.5, 1.0)):
        nu0 = 0.5 * K
        run = integrate_resonant(X0=0.0, nu0=nu0, M=M, K=K,
                                 t0=0.0, t1=100.0, tol=1e-9, n_out=801)
        early = run.ts <= 20.0
        resid = np.max(np.abs(
            run.X[early] * run.nu[early] - (0.0 * nu0 - M * K**2 * run.ts[early])
        ))
        j = int(np.argmin(np.abs(run.ts - 100.0)))
        escape = abs(run.X[j]) / (K * M * run.ts[j])
        late = run.ts >= 50.0
        gamma_dot = -2 * K * M * run.nu[late] / (
            run.X[late] ** 2 + run.nu[late] ** 2
        )
        phase_const = float(np.max(np.abs(gamma_dot) * run.ts[late] ** 2))
        key = f"K={K:g},M={M:g}"
        measures[key] = {"linear_residual": float(resid),
                         "escape_ratio": float(escape),
                         "phase_decay_const": phase_const}
        ok = ok and resid < 1e-8 and 0.9 <= escape <= 1.1 and phase_const <= 10.0
    runtime = time.perf_counter() - t_start
    return CheckResult(
        7, "resonant-linear-law", ok, runtime,
        {**measures, "linear_budget": 1e-8, "escape_band": [0.9, 1.1],
         "phase_const_budget": 10.0},
        "; ".join(
            f"{k}: slope residual {m['linear_residual']:.1e}, "
            f"|X|/(KMt) = {m['escape_ratio']:.3f}, "
            f"sup|dGamma/dt| t^2 = {m['phase_decay_const']:.2f}"
            for k, m in measures.items()
        ),
    )


# ---------------------------------------------------------------------------
# 8. forward-cascade growth exponents
# ---------------------------------------------------------------------------

def check_cascade_growth_exponents(
    cache: ProfileCache | None = None,
) -> CheckResult:
    """Reconstructed resonant field grows like t^{2s-1} in H^s."""
    t_start = time.perf_counter()
    run = integrate_resonant(X0=0.0, nu0=0.5, M=2.0, K=1.0,
                             t0=0.0, t1=30.0, tol=1e-9, n_out=301)
    sel = np.flatnonzero((run.ts >= 3.0) & (run.ts <= 30.0))[::5]  # one decade
    states = [
        resonant_to_state(X, nu, G, run.K, run.M)
        for X, nu, G in zip(run.X[sel], run.nu[sel], run.Gamma[sel])
    ]
    log_t = np.log(run.ts[sel])
    slopes = {}
    for s_exp in (0.75, 1.0):
        series = sobolev_growth(states, s_exp)
        slopes[s_exp] = float(np.polyfit(log_t, np.log(series), 1)[0])
    half_series = sobolev_growth(states, 0.5)
    half_var = float(
        (half_series.max() - half_series.min()) / half_series.mean()
    )
    runtime = time.perf_counter() - t_start
    slope_ok = all(abs(slopes[s] - (2 * s - 1)) <= 0.15 for s in slopes)
    passed = slope_ok and half_var < 0.20
    return CheckResult(
        8, "cascade-growth-exponents", passed, runtime,
        {"fitted_slopes": {str(k): v for k, v in slopes.items()},
         "expected_slopes": {"0.75": 0.5, "1.0": 1.0},
         "slope_tolerance": 0.15, "h_half_variation": half_var,
         "h_half_budget": 0.20, "decade": [3.0, 30.0]},
        f"fitted exponents s=0.75: {slopes[0.75]:.3f} (want 0.5), "
        f"s=1: {slopes[1.0]:.3f} (want 1.0), tol 0.15; H^1/2 variation "
        f"{half_var:.1%} (budget 20%)",
    )


# ---------------------------------------------------------------------------
# 9. perturbative-window power laws
# ---------------------------------------------------------------------------

def check_perturbative_window_laws(
    cache: ProfileCache | None = None,
) -> CheckResult:
    """Speed deficit, speed ratio, separation, and late plateau bands."""
    t_start = time.perf_counter()
    cfg = RegimeConfig(eta=0.01, delta=0.1)
    pm = initial_data_t_minus(cfg)
    back = integrate_system(pm, cfg.t_minus, cfg.t_in,
                            rhs_kind="turbulent", cfg=cfg,
                            tol=1e-10, n_out=201)
    ts = back.ts
    t2b = ts**2 * back.column("b")
    speed = back.one_minus_beta2 * ts**2 / cfg.eta
    sep = back.column("R") / ts
    band3 = 3.0 * math.sqrt(cfg.delta)

    fwd = integrate_system(pm, cfg.t_minus, 10.0 * cfg.t_minus,
                           rhs_kind="turbulent", cfg=cfg,
                           tol=1e-10, n_out=721)
    plateau = regime_report(fwd, cfg)["claims"]["saturation_plateau"]

    ok_b = bool(np.all((t2b >= 0.5) & (t2b <= 2.0)))
    ok_speed = bool(np.all(np.abs(speed - 1.0) <= band3))
    ok_sep = bool(np.all((sep >= 0.9) & (sep <= 1.1)))
    ok_plateau = bool(plateau.get("relative_variation", math.inf) < 0.5)
    runtime = time.perf_counter() - t_start
    passed = ok_b and ok_speed and ok_sep and ok_plateau
    return CheckResult(
        9, "perturbative-window-laws", passed, runtime,
        {"t2b_range": [float(t2b.min()), float(t2b.max())],
         "t2b_band": [0.5, 2.0],
         "speed_dev_max": float(np.max(np.abs(speed - 1.0))),
         "speed_band_halfwidth": band3,
         "sep_range": [float(sep.min()), float(sep.max())],
         "sep_band": [0.9, 1.1],
         "plateau_variation": plateau.get("relative_variation"),
         "plateau_budget": 0.5,
         "window": [cfg.t_in, cfg.t_minus]},
        f"t^2 b in [{t2b.min():.3f}, {t2b.max():.3f}] (band [0.5, 2]); "
        f"(1-beta2)t^2/eta dev {np.max(np.abs(speed - 1)):.3f} "
        f"(band +-{band3:.3f}); R/t in [{sep.min():.4f}, {sep.max():.4f}] "
        f"(band [0.9, 1.1]); plateau variation "
        f"{plateau.get('relative_variation', float('nan')):.3f} (< 0.5)",
    )


# ---------------------------------------------------------------------------
# 10. phase subsystem closed form
# ---------------------------------------------------------------------------

def check_phase_closed_form(cache: ProfileCache | None = None) -> CheckResult:
    """Variation-of-parameters phase solution matches direct integration."""
    t_start = time.perf_counter()
    cfg = RegimeConfig(eta=0.01, delta=0.1)
    samples = np.geomspace(cfg.t_in, cfg.t_minus, 20)

    def rhs(t, y):
        gam, v = y
        return [v, 2.0 * v / t - 2.0 * gam / t**2 + cfg.eta / t]

    sol = solve_ivp(rhs, (cfg.t_minus, cfg.t_in), [0.0, 0.0],
                    method="DOP853", rtol=1e-12, atol=1e-14,
                    t_eval=samples[::-1], dense_output=False)
    gam_rk = sol.y[0][::-1]
    v_rk = sol.y[1][::-1]
    gam_cf, v_cf = phase_subsystem_closed_form(cfg, samples)
    max_diff = float(max(np.max(np.abs(gam_cf - gam_rk)),
                         np.max(np.abs(v_cf - v_rk))))

    dense = np.geomspace(cfg.t_in, cfg.t_minus, 200)
    gam_dense, _ = phase_subsystem_closed_form(cfg, dense)
    envelope = 5.0 * cfg.eta * dense * np.abs(np.log(cfg.eta * dense))
    bound_margin = float(np.max(np.abs(gam_dense) / envelope))

    runtime = time.perf_counter() - t_start
    passed = max_diff < 1e-8 and bound_margin <= 1.0
    return CheckResult(
        10, "phase-closed-form", passed, runtime,
        {"max_diff_vs_rk": max_diff, "diff_budget": 1e-8,
         "bound_margin_max": bound_margin, "n_samples": 20,
         "window": [cfg.t_in, cfg.t_minus]},
        f"closed form vs direct integration: max diff {max_diff:.2e} "
        f"(budget 1e-08) at 20 sample times; |Gamma| / (5 eta t |log eta t|) "
        f"max {bound_margin:.3f} (<= 1)",
    )


# ---------------------------------------------------------------------------
# 11. PDE soliton persistence
# ---------------------------------------------------------------------------

def _drift(series: list[float]) -> float:
    scale = max(abs(series[0]), 1e-30)
    return max(abs(s - series[0]) for s in series) / scale


def check_soliton_persistence(
    cache: ProfileCache | None = None,
) -> CheckResult:
    """Both steppers transport their exact soliton for one time unit."""
    t_start = time.perf_counter()
    if cache is None:
        cache = _default_cache()
    dt = 1e-3
    n_steps = 1000
    measures: dict = {}

    def observe(u, equation, mass, mom, en):
        m, p, _ = conserved_triple(u)
        mass.append(m)
        mom.append(p)
        en.append(flow_energy(equation, u))

    # --- half-wave traveling wave at beta = 0.9 ------------------------
    prof = cache.get(0.9)
    u0 = traveling_wave_data(prof, n=2**12)
    grid = u0.grid
    u = u0
    mass, mom, en = [], [], []
    for k in range(n_steps):
        if k % 100 == 0:
            observe(u, "halfwave", mass, mom, en)
        u = step_halfwave(u, dt)
    observe(u, "halfwave", mass, mom, en)
    t_final = n_steps * dt
    exact = SpectralField.from_modes(
        grid,
        u0.modes * np.exp(-1j * prof.beta * grid.xi * t_final)
        * np.exp(1j * t_final),
    )
    hw_dev = l2_norm(u - exact)
    hw_drift = max(_drift(mass), _drift(mom), _drift(en))
    # reversibility: march back down to the initial state
    w = u
    for _ in range(n_steps):
        w = step_halfwave(w, -dt)
    hw_rev = l2_norm(w - u0)
    measures["halfwave"] = {"l2_deviation": float(hw_dev),
                            "max_rel_drift": float(hw_drift),
                            "reversibility": float(hw_rev)}

    # --- one-pole soliton of the projected cubic flow -------------------
    sg = Grid1D(2**12, 200.0)
    s0, omega, speed = szego_soliton_data(sg, width=1.0)
    u = s0
    mass, mom, en = [], [], []
    for k in range(n_steps):
        if k % 100 == 0:
            observe(u, "szego", mass, mom, en)
        u = step_szego(u, dt)
    observe(u, "szego", mass, mom, en)
    exact = SpectralField.from_modes(
        sg,
        s0.modes * np.exp(-1j * speed * sg.xi * t_final)
        * np.exp(-1j * omega * t_final),
    )
    sz_dev = l2_norm(u - exact)
    sz_drift = max(_drift(mass), _drift(mom), _drift(en))
    measures["szego"] = {"l2_deviation": float(sz_dev),
                         "max_rel_drift": float(sz_drift)}

    runtime = time.perf_counter() - t_start
    passed = (hw_dev < 1e-3 and sz_dev < 1e-3
              and hw_drift < 1e-8 and sz_drift < 1e-8
              and hw_rev < 1e-12)
    return CheckResult(
        11, "soliton-persistence", passed, runtime,
        {**measures, "deviation_budget": 1e-3, "drift_budget": 1e-8,
         "reversibility_budget": 1e-12, "dt": dt, "t_final": t_final},
        f"L2 deviation after t=1: half-wave {hw_dev:.2e}, projected-cubic "
        f"{sz_dev:.2e} (budget 1e-03); max relative drift "
        f"{max(hw_drift, sz_drift):.2e} (budget 1e-08); reversibility "
        f"{hw_rev:.2e} (budget 1e-12)",
    )


# ---------------------------------------------------------------------------
# 12. turbulent growth trend
# ---------------------------------------------------------------------------

def check_turbulent_growth_trend(
    cache: ProfileCache | None = None,
) -> CheckResult:
    """Two-bubble evolution shows monotone H^1 growth tracking t^2/eta.

    Trend-level check at eta = 0.05: the asymptotic statement lives at
    eta -> 0 on unbounded domains, so the graded claims are monotonicity
    and the size of eta*||u||_{H^1}^2 / t^2.  Note the raw ratio carries
    the squared derivative norm of the narrow bubble (-> 4*pi as its
    speed approaches 1); the [1/4, 4] band below does NOT divide that
    constant out, and the measured ratio/(4*pi) band is reported alongside.
    """
    t_start = time.perf_counter()
    if cache is None:
        cache = _default_cache()
    reg = RegimeConfig(eta=0.05, delta=0.15)
    pm = initial_data_t_minus(reg)
    traj = integrate_system(pm, reg.t_minus, reg.t_in,
                            rhs_kind="turbulent", cfg=reg,
                            tol=1e-10, n_out=101)
    p_in = traj.params[0]
    prof1 = cache.get(p_in.beta1)
    prof2 = cache.get(p_in.beta2)
    g = Grid1D(2**14, 16.0)
    u0 = synth_two_soliton(p_in, (prof1, prof2), g)
    cfg = EvolutionConfig(equation="halfwave", dt=4e-4,
                          t_end=reg.t_minus - reg.t_in, grid=g,
                          stride=136, t0=reg.t_in)
    res = run_with_diagnostics(cfg, u0, mod_traj=traj)

    h1sq = np.array([r.sobolev[1.0] ** 2 for r in res])
    ts = np.array([r.t for r in res])
    monotone = bool(np.all(np.diff(h1sq) > 0))
    ratio = h1sq * reg.eta / ts**2
    in_band = bool(np.all((ratio >= 0.25) & (ratio <= 4.0)))
    runtime = time.perf_counter() - t_start
    passed = monotone and in_band
    return CheckResult(
        12, "turbulent-growth-trend", passed, runtime,
        {"eta": reg.eta, "window": [reg.t_in, reg.t_minus],
         "monotone": monotone, "growth_factor": float(h1sq[-1] / h1sq[0]),
         "ratio_range": [float(ratio.min()), float(ratio.max())],
         "ratio_band": [0.25, 4.0],
         "ratio_over_4pi_range": [float(ratio.min() / (4 * math.pi)),
                                  float(ratio.max() / (4 * math.pi))]},
        f"H^1 squared monotone: {monotone} (factor "
        f"{h1sq[-1] / h1sq[0]:.3f}); eta*H1^2/t^2 in "
        f"[{ratio.min():.2f}, {ratio.max():.2f}] vs band [0.25, 4]; "
        f"same ratio / 4pi in [{ratio.min() / (4 * math.pi):.3f}, "
        f"{ratio.max() / (4 * math.pi):.3f}]",
    )


# ---------------------------------------------------------------------------
# registry and driver
# ---------------------------------------------------------------------------

ALL_CHECKS = (
    (1, "integral-identities", check_integral_identities),
    (2, "nondegeneracy-determinant", check_nondegeneracy_determinant),
    (3, "profile-convergence-rate", check_profile_convergence_rate),
    (4, "correction-profile-expansion", check_correction_profile_expansion),
    (5, "tail-law", check_tail_law),
    (6, "pole-system-conservation", check_pole_system_conservation),
    (7, "resonant-linear-law", check_resonant_linear_law),
    (8, "cascade-growth-exponents", check_cascade_growth_exponents),
    (9, "perturbative-window-laws", check_perturbative_window_laws),
    (10, "phase-closed-form", check_phase_closed_form),
    (11, "soliton-persistence", check_soliton_persistence),
    (12, "turbulent-growth-trend", check_turbulent_growth_trend),
)

#: checks that benefit from a shared profile cache
_CACHE_USERS = {3, 4, 11, 12}


def run_all(
    ids: list[int] | None = None,
    cache: ProfileCache | None = None,
    parallel: bool = False,
) -> list[CheckResult]:
    """Run the selected checks (all twelve by default), in id order.

    With ``parallel=True`` the checks run on a thread pool and each builds
    its own profile ladder (full isolation, more total work); sequentially
    a single cache is shared by the checks that use one.
    """
    known = {cid for cid, _, _ in ALL_CHECKS}
    if ids is None:
        selected = list(ALL_CHECKS)
    else:
        bad = sorted(set(ids) - known)
        if bad:
            raise ValueError(f"unknown check ids: {bad} (known: 1..12)")
        selected = [entry for entry in ALL_CHECKS if entry[0] in ids]

    if parallel:
        with ThreadPoolExecutor(max_workers=min(4, len(selected))) as pool:
            futures = [pool.submit(fn, None) for _, _, fn in selected]
            return [f.result() for f in futures]

    if cache is None and any(cid in _CACHE_USERS for cid, _, _ in selected):
        cache = _default_cache()
    return [fn(cache) for _, _, fn in selected]
