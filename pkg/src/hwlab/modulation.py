"""Two-bubble parameter dynamics.

The slow degrees of freedom of a two-soliton configuration — scales
(lambda1, lambda2), speeds (beta1, beta2), centers, phases, the phase
shift Gamma = gamma2 - gamma1 and the renormalized separation
R = (x2 - x1)/(lambda1 (1 - beta1)) — obey a coupled ODE system driven
by the overlap of each bubble with the other's far-field tail.  This
module evaluates the driving terms two independent ways:

* ``eval_sharp_rhs`` — profile-backed: the tail of one solved traveling
  profile is evaluated at the other bubble's location, weighted by the
  solved profile constants (mass-type N, momentum-type P, tail strength
  c) and their logarithmic scale derivatives.
* ``eval_turbulent_rhs`` — the closed-form surrogate valid in the
  perturbative window where the separation tracks time: B2 = 2cos(G)/t,
  M2 = -2(1-mu)/t + 2 Gamma/t^2 - eta/t, with B1 and M1 negligible.

``integrate_system`` advances either variant with an adaptive embedded
Runge-Kutta pair, carrying Gamma and R redundantly (their own ODEs) and
re-deriving them from the primitive parameters at every output as a
consistency audit.  ``phase_subsystem_closed_form`` gives the
variation-of-parameters solution of the linearized phase subsystem, and
``regime_report`` grades a trajectory against the expected power laws.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp

from .profiles import (
    ProfileCache,
    ProfileQBeta,
    lambda_tilde_constants,
    tail_prediction,
)

logger = logging.getLogger(__name__)

# Stand-in for the (unquantified) minimal admissible separation; states
# closer than this are flagged as outside the perturbative regime.
SOFT_MIN_SEPARATION = 2.0

_CSV_HEADER = (
    "t,lambda1,lambda2,beta1,beta2,Gamma,R,x1,x2,gamma1,gamma2,b,"
    "one_minus_beta2_times_t2_over_eta"
)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModParams:
    """Parameter vector of the two-bubble ansatz.

    Gamma and R are carried redundantly next to the primitive phases and
    centers; ``consistency_errors`` measures the mismatch between the
    carried values and the ones re-derived from primitives.
    """

    lambda1: float
    lambda2: float
    beta1: float
    beta2: float
    Gamma: float
    R: float
    x1: float
    x2: float
    gamma1: float
    gamma2: float

    def __post_init__(self):
        vals = [self.lambda1, self.lambda2, self.beta1, self.beta2,
                self.Gamma, self.R, self.x1, self.x2,
                self.gamma1, self.gamma2]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("parameters must be finite")
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ValueError("scales must be positive")
        for b in (self.beta1, self.beta2):
            if not 0.0 < b < 1.0:
                raise ValueError(f"speed must lie in (0, 1), got {b}")
        if self.R <= 0:
            raise ValueError("renormalized separation must be positive")

    @property
    def mu(self) -> float:
        return self.lambda2 / self.lambda1

    @property
    def b(self) -> float:
        return (1.0 - self.beta2) / (1.0 - self.beta1)

    def derived_gamma(self) -> float:
        return self.gamma2 - self.gamma1

    def derived_r(self) -> float:
        return (self.x2 - self.x1) / (self.lambda1 * (1.0 - self.beta1))

    def consistency_errors(self) -> dict[str, float]:
        """Carried-vs-derived mismatch, relative for the separation."""
        return {
            "Gamma": abs(self.Gamma - self.derived_gamma()),
            "R": abs(self.R - self.derived_r()) / max(1.0, abs(self.R)),
        }

    def admissibility_violations(
        self, cfg: "RegimeConfig | None" = None
    ) -> list[str]:
        """Soft validity flags for the perturbative two-bubble regime."""
        out = []
        if self.R <= SOFT_MIN_SEPARATION:
            out.append(f"separation R = {self.R:.4g} below soft minimum")
        if 1.0 - self.beta2 < math.exp(-self.R):
            out.append("second bubble faster than the separation allows")
        if cfg is not None:
            if not cfg.eta / 2 < 1.0 - self.beta1 < 2 * cfg.eta:
                out.append("first-bubble speed left the declared eta band")
            if not 0.0 < self.b < cfg.delta:
                out.append("speed ratio b left (0, delta)")
        return out

    def pack(self) -> np.ndarray:
        return np.array([
            self.lambda1, self.lambda2, self.beta1, self.beta2,
            self.Gamma, self.R, self.x1, self.x2, self.gamma1, self.gamma2,
        ])

    @classmethod
    def unpack(cls, y: Sequence[float]) -> "ModParams":
        l1, l2, b1, b2, G, R, x1, x2, g1, g2 = (float(v) for v in y)
        return cls(lambda1=l1, lambda2=l2, beta1=b1, beta2=b2, Gamma=G,
                   R=R, x1=x1, x2=x2, gamma1=g1, gamma2=g2)


@dataclass(frozen=True)
class RegimeConfig:
    """Smallness parameters and the derived window times.

    t_in = eta^(-2 delta) marks the start of the perturbative window and
    t_minus = delta/eta its end, where the bubble interaction peaks.
    """

    eta: float
    delta: float

    def __post_init__(self):
        if not (self.eta > 0 and self.delta > 0):
            raise ValueError("eta and delta must be positive")
        if self.eta > 0.2 or self.delta > 0.3:
            warnings.warn(
                "eta/delta outside the asymptotic smallness range; "
                "regime estimates may not apply",
                stacklevel=2,
            )
        if not self.t_in < self.t_minus:
            raise ValueError(
                f"window is empty: t_in = {self.t_in:.4g} must precede "
                f"t_minus = {self.t_minus:.4g}"
            )

    @property
    def t_in(self) -> float:
        return self.eta ** (-2.0 * self.delta)

    @property
    def t_minus(self) -> float:
        return self.delta / self.eta


@dataclass
class ModTrajectory:
    """Time-ordered samples of a parameter integration."""

    ts: np.ndarray
    params: list[ModParams]
    rhs_kind: str
    cfg: RegimeConfig | None = None
    stats: dict = field(default_factory=dict)
    flags: list[tuple[float, list[str]]] = field(default_factory=list)

    def __post_init__(self):
        if len(self.ts) != len(self.params):
            raise ValueError("sample count mismatch")
        if len(self.ts) > 1 and not np.all(np.diff(self.ts) > 0):
            raise ValueError("samples must be strictly increasing in t")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.params])

    @property
    def one_minus_beta2(self) -> np.ndarray:
        return 1.0 - self.column("beta2")


# ---------------------------------------------------------------------------
# profile point evaluation
# ---------------------------------------------------------------------------

def profile_point_value(p: ProfileQBeta, x: float) -> complex:
    """Profile value at an off-grid point on the line.

    Inside the box interior the band-limited interpolant of the solved
    (periodized) profile is corrected by subtracting the two nearest
    periodization image tails; far outside, the far-field law is used
    directly.
    """
    return _point_eval(p, x, derivative=False)


def profile_point_slope(p: ProfileQBeta, x: float) -> complex:
    """Spatial derivative of the profile at an off-grid point."""
    return _point_eval(p, x, derivative=True)


def _point_eval(p: ProfileQBeta, x: float, derivative: bool) -> complex:
    grid = p.grid
    half = grid.length / 2.0
    idx = 1 if derivative else 0
    if abs(x) >= half / 2.0:
        return tail_prediction(p, x)[idx]
    weights = p.field.modes / grid.length
    if derivative:
        weights = 1j * grid.xi * weights
    val = complex(np.dot(weights, np.exp(1j * grid.xi * x)))
    for image in (x - grid.length, x + grid.length):
        val -= tail_prediction(p, image)[idx]
    return val


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def eval_sharp_rhs(
    p: ModParams,
    cache: ProfileCache,
) -> tuple[float, float, float, float]:
    """Profile-backed main terms (B1, B2, M1, M2) of the parameter flow.

    Each speed is driven by the other bubble's tail sampled at the
    renormalized separation, paired against the tail-strength constant
    of the profile being driven; scales follow through the logarithmic
    beta-derivatives of the momentum-type constant, plus direct overlap
    terms for the second bubble.

    States outside the soft admissible set are flagged via the module
    logger but still evaluated.
    """
    violations = p.admissibility_violations()
    if violations:
        logger.warning("state outside admissible set: %s", violations)

    prof1 = cache.get(p.beta1)
    prof2 = cache.get(p.beta2)
    n1, p1_const = prof1.n_const, prof1.p_const
    n2, p2_const = prof2.n_const, prof2.p_const
    c1, c2 = prof1.c_const, prof2.c_const
    ltn1, ltp1, _ = lambda_tilde_constants(*cache.neighbors(p.beta1))
    ltn2, ltp2, _ = lambda_tilde_constants(*cache.neighbors(p.beta2))

    phase = complex(math.cos(p.Gamma), math.sin(p.Gamma))
    q2_at = profile_point_value(prof2, -p.R / (p.b * p.mu))
    q1_at = profile_point_value(prof1, p.R)
    dq1_at = profile_point_slope(prof1, p.R)

    b1 = 2.0 * (q2_at * np.conj(c1) * phase).real / (n1 - ltn1)
    b2 = 2.0 * (q1_at * np.conj(c2) * np.conj(phase)).real / (n2 - ltn2)
    m1 = (ltp1 / p1_const) * b1
    m2 = (
        (ltp2 / p2_const) * b2
        - 2.0 * (1.0 - p.mu) * (phase * np.conj(q1_at)).real
        - 2.0 * (phase * np.conj(dq1_at)).imag
    )
    return b1, b2, float(m1), float(m2)


def eval_turbulent_rhs(
    p: ModParams,
    cfg: RegimeConfig,
    t: float | None = None,
) -> tuple[float, float, float, float]:
    """Closed-form surrogate (B1, B2, M1, M2) for the perturbative window.

    The separation is identified with time; when no explicit clock is
    given the carried R is used.
    """
    if t is None:
        t = p.R
    b2 = 2.0 * math.cos(p.Gamma) / t
    m2 = -2.0 * (1.0 - p.mu) / t + 2.0 * p.Gamma / t**2 - cfg.eta / t
    return 0.0, b2, 0.0, m2


def initial_data_t_minus(cfg: RegimeConfig) -> ModParams:
    """The pinned state at the end of the perturbative window.

    Unit scales, zero phases, 1 - beta1 = eta, speed ratio b = 1/t_minus^2,
    first bubble at the origin and separation R = t_minus.
    """
    tm = cfg.t_minus
    one_minus_b2 = cfg.eta / tm**2
    return ModParams(
        lambda1=1.0,
        lambda2=1.0,
        beta1=1.0 - cfg.eta,
        beta2=1.0 - one_minus_b2,
        Gamma=0.0,
        R=tm,
        x1=0.0,
        x2=cfg.eta * tm,
        gamma1=0.0,
        gamma2=0.0,
    )


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def _make_rhs(
    rhs_kind: str,
    cfg: RegimeConfig | None,
    cache: ProfileCache | None,
    snap_beta: bool,
) -> Callable[[float, ModParams], tuple[float, float, float, float]]:
    if rhs_kind == "turbulent":
        if cfg is None:
            raise ValueError("turbulent right-hand side needs a RegimeConfig")
        return lambda t, p: eval_turbulent_rhs(p, cfg, t)
    if rhs_kind == "turbulent_pinned":
        # diagnostic variant: phase frozen at 0 and scales frozen at 1,
        # so d/dt log(1 - beta2) = -2/t exactly
        return lambda t, p: (0.0, 2.0 / t, 0.0, 0.0)
    if rhs_kind == "zero":
        return lambda t, p: (0.0, 0.0, 0.0, 0.0)
    if rhs_kind == "sharp":
        if cache is None:
            raise ValueError("sharp right-hand side needs a profile cache")
        if snap_beta:
            snapped = _BetaSnappingCache(cache)
            return lambda t, p: eval_sharp_rhs(p, snapped)
        return lambda t, p: eval_sharp_rhs(p, cache)
    raise ValueError(f"unknown rhs_kind {rhs_kind!r}")


class _BetaSnappingCache:
    """Profile lookup quantized to a relative ladder in (1 - beta).

    Inside an integration loop beta moves continuously; solving a fresh
    profile per step would dominate the runtime.  Lookups are snapped to
    the nearest rung of a 2%-spaced geometric ladder in (1 - beta); the
    profile constants vary slowly enough in beta that the quantization
    error is far below the modeling error of the main-term truncation.
    """

    _STEP = math.log(1.02)

    def __init__(self, inner: ProfileCache):
        self._inner = inner

    def _snap(self, beta: float) -> float:
        k = round(math.log(1.0 - beta) / self._STEP)
        return 1.0 - math.exp(k * self._STEP)

    def get(self, beta: float) -> ProfileQBeta:
        return self._inner.get(self._snap(beta))

    def neighbors(self, beta: float, dbeta: float | None = None):
        return self._inner.neighbors(self._snap(beta), dbeta)


def integrate_system(
    state: ModParams,
    t0: float,
    t1: float,
    rhs_kind: str = "turbulent",
    cfg: RegimeConfig | None = None,
    cache: ProfileCache | None = None,
    tol: float = 1e-10,
    n_out: int = 201,
    snap_beta: bool = True,
) -> ModTrajectory:
    """Advance the parameter system from t0 to t1 (either direction).

    Gamma and R ride along with their own ODEs; at every output they are
    checked against the values re-derived from phases/centers (mismatch
    above 1e-8 raises) and re-synced to the derived values.
    """
    rhs = _make_rhs(rhs_kind, cfg, cache, snap_beta)

    def odefun(t, y):
        p = ModParams.unpack(y)
        b1v, b2v, m1v, m2v = rhs(t, p)
        dbeta1 = (1.0 - p.beta1) * b1v / p.lambda1
        dbeta2 = (1.0 - p.beta2) * b2v / p.lambda2
        dgamma = 1.0 / p.lambda2 - 1.0 / p.lambda1
        dr = (p.beta2 - p.beta1) / (p.lambda1 * (1.0 - p.beta1)) \
            - p.R * (m1v - b1v) / p.lambda1
        return [
            m1v, m2v, dbeta1, dbeta2, dgamma, dr,
            p.beta1, p.beta2, 1.0 / p.lambda1, 1.0 / p.lambda2,
        ]

    t_eval = np.linspace(t0, t1, n_out)
    sol = solve_ivp(
        odefun, (t0, t1), state.pack(), method="RK45",
        rtol=tol, atol=tol, t_eval=t_eval, dense_output=False,
    )
    if not sol.success:
        raise RuntimeError(f"parameter integration failed: {sol.message}")

    ts = sol.t
    raw = [ModParams.unpack(sol.y[:, j]) for j in range(sol.y.shape[1])]
    params: list[ModParams] = []
    flags: list[tuple[float, list[str]]] = []
    for t, p in zip(ts, raw):
        errs = p.consistency_errors()
        worst = max(errs.values())
        if worst > 1e-8:
            raise RuntimeError(
                f"redundant-representation drift {worst:.3e} at t = {t:.6g}"
            )
        synced = replace(p, Gamma=p.derived_gamma(), R=p.derived_r())
        params.append(synced)
        violations = synced.admissibility_violations(cfg)
        if violations:
            flags.append((float(t), violations))

    order = np.argsort(ts)
    ts_sorted = ts[order]
    params_sorted = [params[j] for j in order]
    stats = {"nfev": int(sol.nfev), "status": int(sol.status),
             "rhs_kind": rhs_kind, "tol": tol}
    return ModTrajectory(ts=ts_sorted, params=params_sorted,
                         rhs_kind=rhs_kind, cfg=cfg, stats=stats,
                         flags=flags)


# ---------------------------------------------------------------------------
# phase subsystem
# ---------------------------------------------------------------------------

def phase_subsystem_closed_form(
    cfg: RegimeConfig, t: float | np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(Gamma, v) of the linearized phase subsystem at time(s) t.

    The subsystem Gamma' = v, v' = 2v/t - 2 Gamma/t^2 + eta/t with
    terminal data Gamma = v = 0 at t_minus is solved by variation of
    parameters over the homogeneous basis {(t, 1), (t^2, 2t)} (Wronskian
    t^2); the two forcing integrals are evaluated by quadrature.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0.5 * cfg.t_in) or np.any(ts > 2.0 * cfg.t_minus):
        raise ValueError("time outside the perturbative window")
    eta, tm = cfg.eta, cfg.t_minus

    gammas = np.empty_like(ts)
    vs = np.empty_like(ts)
    for j, tj in enumerate(ts):
        # forcing f = eta/tau enters through f*basis/Wronskian
        int1, _ = quad(lambda tau: eta / tau * tau**2 / tau**2, tj, tm)
        int2, _ = quad(lambda tau: eta / tau * tau / tau**2, tj, tm)
        gammas[j] = tj * int1 - tj**2 * int2
        vs[j] = int1 - 2.0 * tj * int2
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(gammas[0]), float(vs[0])
    return gammas, vs


# ---------------------------------------------------------------------------
# regime report
# ---------------------------------------------------------------------------

def regime_report(traj: ModTrajectory, cfg: RegimeConfig) -> dict:
    """Grade a trajectory against the perturbative-window power laws.

    Claims:
      * speed law — (1 - beta2) t^2 / eta stays within 1 +- C sqrt(delta)
        on [t_in, t_minus], with the fitted C reported;
      * separation law — R/t stays within 1 +- C eta^delta;
      * saturation plateau — for runs extending past t_minus, the late
        relative variation of 1 - beta2 and its position inside the wide
        expected band eta^3 * exp(+-5/delta);
      * growth window — the scaling proxy eta/((1 - beta2) t^2) for the
        normalized squared-H1 size stays within [1/2, 2].
    """
    ts = traj.ts
    one_mb2 = traj.one_minus_beta2
    rr = traj.column("R")

    window = (ts >= cfg.t_in * (1 - 1e-9)) & (ts <= cfg.t_minus * (1 + 1e-9))
    report: dict = {
        "eta": cfg.eta,
        "delta": cfg.delta,
        "t_in": cfg.t_in,
        "t_minus": cfg.t_minus,
        "span": [float(ts[0]), float(ts[-1])],
        "claims": {},
    }

    if np.any(window):
        x = one_mb2[window] * ts[window] ** 2 / cfg.eta
        fitted = float(np.max(np.abs(x - 1.0)) / math.sqrt(cfg.delta))
        report["claims"]["speed_law"] = {
            "statement": "(1-beta2) t^2/eta in 1 +- C sqrt(delta) on "
                         "[t_in, t_minus]",
            "fitted_C": fitted,
            "range": [float(np.min(x)), float(np.max(x))],
            "passes": bool(fitted <= 3.0),
        }
        y = rr[window] / ts[window]
        fitted_r = float(np.max(np.abs(y - 1.0)) / cfg.eta ** cfg.delta)
        report["claims"]["separation_law"] = {
            "statement": "R/t in 1 +- C eta^delta on [t_in, t_minus]",
            "fitted_C": fitted_r,
            "range": [float(np.min(y)), float(np.max(y))],
            "passes": bool(fitted_r <= 3.0),
        }
        proxy = cfg.eta / (one_mb2[window] * ts[window] ** 2)
        report["claims"]["growth_window"] = {
            "statement": "normalized squared-H1 proxy in [1/2, 2] on "
                         "[t_in, t_minus]",
            "range": [float(np.min(proxy)), float(np.max(proxy))],
            "passes": bool(np.min(proxy) >= 0.5 and np.max(proxy) <= 2.0),
        }

    if ts[-1] > 2.0 * cfg.t_minus:
        # the decay of 1-beta2 only stops once the phase shift has
        # rotated a quarter turn and the coupling term changes sign;
        # the plateau is graded from that first decoherence time on
        gam = np.abs(traj.column("Gamma"))
        decohered = (gam >= math.pi / 2.0) & (ts >= cfg.t_minus)
        if np.any(decohered):
            plate = one_mb2[decohered]
            mid = float(np.median(plate))
            variation = float((np.max(plate) - np.min(plate)) / mid)
            lo = cfg.eta**3 * math.exp(-5.0 / cfg.delta)
            hi = cfg.eta**3 * math.exp(5.0 / cfg.delta)
            report["claims"]["saturation_plateau"] = {
                "statement": "late 1-beta2 plateau: peak-to-peak variation "
                             "after phase decoherence, plus wide expected "
                             "band",
                "plateau_start": float(ts[decohered][0]),
                "plateau_value": mid,
                "relative_variation": variation,
                "band": [lo, hi],
                "passes": bool(variation < 0.5 and lo <= mid <= hi),
            }
        else:
            report["claims"]["saturation_plateau"] = {
                "statement": "late 1-beta2 plateau: peak-to-peak variation "
                             "after phase decoherence, plus wide expected "
                             "band",
                "passes": False,
                "reason": "phase never decohered within the run",
            }

    return report


def report_to_json(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def trajectory_to_csv(traj: ModTrajectory, path) -> None:
    """Write the pinned column layout; needs a config for the eta column."""
    if traj.cfg is None:
        raise ValueError("trajectory carries no RegimeConfig; "
                         "eta column undefined")
    eta = traj.cfg.eta
    with open(path, "w", newline="\n") as fh:
        fh.write(_CSV_HEADER + "\n")
        for t, p in zip(traj.ts, traj.params):
            norm2 = (1.0 - p.beta2) * t**2 / eta
            row = [t, p.lambda1, p.lambda2, p.beta1, p.beta2, p.Gamma,
                   p.R, p.x1, p.x2, p.gamma1, p.gamma2, p.b, norm2]
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
