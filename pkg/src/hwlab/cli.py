"""Command-line surface: reproducible runs of every library capability.

Subcommands::

    profile     solve the limit profile and a list of traveling profiles
    ground      solve the ground state and report the mass threshold
    oracle      closed-form integral suite + interaction-determinant check
    modulation  integrate the two-bubble parameter system over a window
    szego       integrate the two-pole ODE systems (full/reduced/resonant)
    evolve      run a PDE simulation and record diagnostics
    check       run the end-to-end verification suite

Conventions shared by all commands:

* configuration comes from built-in defaults, then a flat ``key=value``
  config file (``#`` comments allowed), then explicit flags — later wins;
* numeric parameters outside their documented validity range are rejected
  unless ``--force`` acknowledges them;
* each run writes into its own directory ``<command>-<UTCstamp>-<hash8>``
  under the output root (``--out``, overridden by env ``HWLAB_OUT``),
  containing the CSV products and a ``manifest.json`` echoing the resolved
  configuration, library versions, wall time, seed, and pass/fail summary;
* exit code 0 = success, 1 = validation error (bad flags/config; nothing
  is written), 2 = numerical failure (the run directory and manifest are
  still written, with the error recorded);
* CSV files are comma-separated with ``.`` decimals, a header row, and LF
  line endings; identical config + seed reproduces them byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .spectral import Grid1D, field_to_csv, project_plus
from .profiles import (
    ProfileCache,
    appendix_a_oracle,
    nondegeneracy_det,
    profile_constants,
    q_beta_minus_q_plus_h_half,
    sample_q_plus,
    solve_ground_state,
)
from .szego import (
    SzegoTrajectory,
    SzegoTwoSolitonState,
    conserved_quantities,
    integrate_full,
    integrate_resonant,
    resonant_to_state,
    state_to_reduced,
)
from .szego import trajectory_to_csv as szego_trajectory_to_csv
from .modulation import (
    RegimeConfig,
    initial_data_t_minus,
    integrate_system,
    regime_report,
    report_to_json,
)
from .modulation import trajectory_to_csv as modulation_trajectory_to_csv
from .evolution import (
    EvolutionConfig,
    diagnostics_to_csv,
    load_checkpoint,
    run_with_diagnostics,
    save_checkpoint,
    synth_two_soliton,
    traveling_wave_data,
)
from .acceptance import ALL_CHECKS, run_all

__all__ = ["main", "ValidationError", "NumericalFailure", "load_config"]

PI4 = math.pi**4


class ValidationError(Exception):
    """Bad flags, config keys, or out-of-range parameters (exit code 1)."""


class NumericalFailure(Exception):
    """The run itself failed or missed its bands (exit code 2)."""


# ---------------------------------------------------------------------------
# parameter tables
# ---------------------------------------------------------------------------

class Param:
    """One configurable parameter: type, default, documented range."""

    def __init__(self, name, kind, default, valid=None, help=""):
        self.name = name          # flag/config key, underscore form
        self.kind = kind          # int | float | floats | str | complex
        self.default = default
        self.valid = valid        # (lo, hi) for numerics, choices for str
        self.help = help


def _grid_params(n_default, length_default):
    return [
        Param("n", "int", n_default, (16, 2**20),
              "grid resolution (power of two)"),
        Param("length", "float", length_default, (1.0, 1e5),
              "periodic domain length"),
    ]


COMMAND_PARAMS: dict[str, list[Param]] = {
    "profile": [
        *_grid_params(2**15, 400.0),
        Param("betas", "floats", [0.9, 0.95, 0.99], (0.5, 0.9995),
              "comma-separated speeds to solve"),
        Param("tol", "float", 1e-9, (1e-13, 1e-6), "solver tolerance"),
    ],
    "ground": [
        *_grid_params(2**15, 400.0),
        Param("tol", "float", 1e-9, (1e-13, 1e-6), "solver tolerance"),
    ],
    "oracle": [
        *_grid_params(2**15, 400.0),
        Param("beta_det", "float", 0.999, (0.9, 0.9995),
              "speed at which the interaction determinant is graded"),
        Param("tol_integrals", "float", 1e-5, (1e-12, 1e-2),
              "absolute tolerance for the integral identities"),
    ],
    "modulation": [
        Param("eta", "float", 0.01, (0.005, 0.2), "mass-scale parameter"),
        Param("delta", "float", 0.1, (0.05, 0.3), "window-shape parameter"),
        Param("rhs", "str", "turbulent",
              ("turbulent", "sharp", "turbulent_pinned"),
              "right-hand side variant"),
        Param("span", "str", "window", ("window", "saturation"),
              "window: backward to t_in; saturation: forward to 10*t_minus"),
        Param("n_out", "int", 201, (2, 100000), "output samples"),
        Param("tol", "float", 1e-10, (1e-13, 1e-6), "integrator tolerance"),
    ],
    "szego": [
        Param("mode", "str", "full", ("full", "reduced", "resonant"),
              "which system to integrate"),
        Param("t0", "float", 0.0, (-1e6, 1e6), "start time"),
        Param("t1", "float", 50.0, (-1e6, 1e6), "end time"),
        Param("tol", "float", 1e-12, (1e-14, 1e-6), "integrator tolerance"),
        Param("n_out", "int", 201, (2, 100000), "output samples"),
        # full/reduced initial state
        Param("x1", "float", 4.0, (-1e4, 1e4), "first pole position"),
        Param("x2", "float", -4.0, (-1e4, 1e4), "second pole position"),
        Param("kappa1", "float", 1.4, (1e-6, 1e4), "first pole width"),
        Param("kappa2", "float", 0.8, (1e-6, 1e4), "second pole width"),
        Param("alpha1", "complex", 1.0 + 0.3j, None, "first amplitude"),
        Param("alpha2", "complex", 0.7 - 0.4j, None, "second amplitude"),
        # resonant initial state
        Param("K", "float", 1.0, (1e-6, 1e3), "mean width (resonant mode)"),
        Param("M", "float", 2.0, (1e-6, 1e3), "mass constant (resonant mode)"),
        Param("X0", "float", 0.0, (-1e6, 1e6), "initial separation"),
        Param("nu0", "float", 0.5, (-1e3, 1e3),
              "initial width imbalance (|nu0| < K)"),
    ],
    "evolve": [
        Param("equation", "str", None,
              ("halfwave", "szego", "szego_with_transport"),
              "flow to integrate (default depends on the data choice)"),
        Param("data", "str", "qbeta",
              ("qplus", "qbeta", "two-soliton", "file"), "initial data"),
        Param("n", "int", None, (16, 2**20), "grid resolution"),
        Param("length", "float", None, (1.0, 1e5),
              "domain length (derived for qbeta, from file for file)"),
        Param("beta", "float", 0.9, (0.5, 0.9995), "speed for qbeta data"),
        Param("eta", "float", 0.05, (0.005, 0.2),
              "mass scale for two-soliton data"),
        Param("delta", "float", 0.15, (0.05, 0.3),
              "window shape for two-soliton data"),
        Param("file", "str", "", None,
              "checkpoint prefix for data=file (expects .bin and .json)"),
        Param("dt", "float", None, (1e-8, 1.0), "time step"),
        Param("t_end", "float", None, (1e-6, 1e4), "integration span"),
        Param("stride", "int", None, (1, 10**7),
              "steps between diagnostic records"),
    ],
    "check": [
        Param("ids", "str", "all", None,
              "comma-separated check ids (1..12) or 'all'"),
        Param("parallel", "int", 0, (0, 1),
              "1: thread pool, fully isolated checks (more total work)"),
    ],
}

#: per-data-kind defaults for `evolve` parameters left unset
_EVOLVE_DEFAULTS = {
    "qplus": {"equation": "szego", "n": 2**12, "length": 200.0,
              "dt": 1e-3, "t_end": 1.0, "stride": 100},
    "qbeta": {"equation": "halfwave", "n": 2**12, "length": None,
              "dt": 1e-3, "t_end": 1.0, "stride": 100},
    "two-soliton": {"equation": "halfwave", "n": 2**14, "length": 16.0,
                    "dt": 4e-4, "t_end": None, "stride": 136},
    "file": {"equation": None, "n": None, "length": None,
             "dt": 1e-3, "t_end": 1.0, "stride": 100},
}


# ---------------------------------------------------------------------------
# config resolution
# ---------------------------------------------------------------------------

def load_config(path) -> dict[str, str]:
    """Parse a flat ``key=value`` file; ``#`` comments and blanks allowed."""
    out: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(
                f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key:
            raise ValidationError(f"{path}:{lineno}: empty key")
        out[key] = value.strip()
    return out


def _coerce(param: Param, raw):
    if raw is None:
        return None
    if not isinstance(raw, str):
        return raw
    try:
        if param.kind == "int":
            return int(raw)
        if param.kind == "float":
            return float(raw)
        if param.kind == "floats":
            return [float(tok) for tok in raw.split(",") if tok.strip()]
        if param.kind == "complex":
            return complex(raw.replace(" ", ""))
        return raw
    except ValueError as exc:
        raise ValidationError(
            f"parameter {param.name}: cannot parse {raw!r} as {param.kind}"
        ) from exc


def _check_range(param: Param, value, force: bool):
    if value is None or param.valid is None:
        return
    if param.kind == "str":
        if value not in param.valid:
            raise ValidationError(
                f"parameter {param.name}: {value!r} not one of {param.valid}")
        return
    lo, hi = param.valid
    values = value if param.kind == "floats" else [value]
    for v in values:
        if not (lo <= v <= hi):
            if force:
                continue
            raise ValidationError(
                f"parameter {param.name} = {v} outside the documented range "
                f"[{lo}, {hi}]; pass --force to acknowledge")


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags, then range validation."""
    params = COMMAND_PARAMS[command]
    by_name = {p.name: p for p in params}
    resolved = {p.name: p.default for p in params}

    if args.config:
        file_values = load_config(args.config)
        unknown = sorted(set(file_values) - set(by_name))
        if unknown:
            raise ValidationError(
                f"config file {args.config}: unknown keys for "
                f"'{command}': {unknown}")
        for key, raw in file_values.items():
            resolved[key] = _coerce(by_name[key], raw)

    for p in params:
        flag_value = getattr(args, p.name, None)
        if flag_value is not None:
            resolved[p.name] = _coerce(p, flag_value)

    for p in params:
        _check_range(p, resolved[p.name], args.force)

    # cross-parameter consistency (not a range issue; --force cannot help)
    needs_window = command == "modulation" or (
        command == "evolve" and resolved.get("data") == "two-soliton")
    if needs_window:
        try:
            RegimeConfig(eta=resolved["eta"], delta=resolved["delta"])
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
    if command == "check":
        _parse_check_ids(resolved["ids"])

    resolved["seed"] = args.seed
    return resolved


def _parse_check_ids(raw: str) -> list[int] | None:
    if raw == "all":
        return None
    try:
        ids = [int(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(
            f"ids must be integers or 'all', got {raw!r}") from exc
    known = {cid for cid, _, _ in ALL_CHECKS}
    bad = sorted(set(ids) - known)
    if not ids or bad:
        raise ValidationError(
            f"unknown check ids: {bad or raw!r} (known: 1..12)")
    return ids


# ---------------------------------------------------------------------------
# run directory and manifest
# ---------------------------------------------------------------------------

def _jsonable(value):
    if isinstance(value, complex):
        return repr(value)
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _config_hash(command: str, config: dict) -> str:
    canon = json.dumps({"command": command, **_jsonable(config)},
                       sort_keys=True)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:8]


def make_run_dir(out_root, command: str, config: dict) -> Path:
    root = Path(os.environ.get("HWLAB_OUT", out_root))
    stamp = time.strftime("%Y%m%d-%H%M%S", time.gmtime())
    base = f"{command}-{stamp}-{_config_hash(command, config)}"
    for suffix in [""] + [f"-{i}" for i in range(2, 1000)]:
        candidate = root / (base + suffix)
        try:
            candidate.mkdir(parents=True, exist_ok=False)
            return candidate
        except FileExistsError:
            continue
    raise NumericalFailure(f"cannot allocate a run directory under {root}")


def write_manifest(run_dir: Path, command: str, config: dict, passed: bool,
                   summary: dict, outputs: list[str], wall_time: float,
                   error: str | None = None) -> None:
    manifest = {
        "command": command,
        "config": _jsonable(config),
        "error": error,
        "outputs": sorted(outputs),
        "passed": bool(passed),
        "seed": config.get("seed", 0),
        "summary": _jsonable(summary),
        "versions": {
            "hwlab": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "scipy": scipy.__version__,
        },
        "wall_time_s": round(wall_time, 3),
    }
    with open(run_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


# ---------------------------------------------------------------------------
# command implementations: each returns (passed, summary, outputs)
# ---------------------------------------------------------------------------

def _cmd_profile(cfg: dict, run_dir: Path):
    grid = Grid1D(cfg["n"], cfg["length"])
    outputs = []
    qp = sample_q_plus(grid)
    field_to_csv(qp, run_dir / "qplus.csv")
    outputs.append("qplus.csv")

    cache = ProfileCache(grid, tol=cfg["tol"])
    lines = ["beta,residual,mass_const,momentum_const,re_energy_const,"
             "im_energy_const,h_half_to_limit"]
    rows = {}
    for beta in cfg["betas"]:
        p = cache.get(beta)
        stem = f"qbeta_{beta:g}"
        field_to_csv(p.field, run_dir / f"{stem}.csv")
        outputs.append(f"{stem}.csv")
        n_c, p_c, c_c = profile_constants(p)
        dist = q_beta_minus_q_plus_h_half(p)
        lines.append(f"{beta!r},{p.residual!r},{n_c!r},{p_c!r},"
                     f"{c_c.real!r},{c_c.imag!r},{dist!r}")
        rows[f"{beta:g}"] = {"residual": p.residual, "mass_const": n_c,
                             "h_half_to_limit": dist}
    (run_dir / "constants.csv").write_text("\n".join(lines) + "\n",
                                           encoding="utf-8")
    outputs.append("constants.csv")
    return True, {"profiles": rows}, outputs


def _cmd_ground(cfg: dict, run_dir: Path):
    grid = Grid1D(cfg["n"], cfg["length"])
    g = solve_ground_state(grid, tol=cfg["tol"])
    field_to_csv(g.field, run_dir / "ground.csv")
    threshold = 2 * math.pi
    summary = {
        "mass": g.mass,
        "limit_profile_mass": threshold,
        "below_threshold": bool(g.mass < threshold),
        "residual": g.residual,
    }
    return bool(g.mass < threshold), summary, ["ground.csv"]


def _cmd_oracle(cfg: dict, run_dir: Path):
    grid = Grid1D(cfg["n"], cfg["length"])
    rows = appendix_a_oracle(grid)
    table = []
    for row in rows:
        ok = row["abs_err"] < cfg["tol_integrals"]
        table.append({
            "name": row["label"], "value": complex(row["value"]),
            "target": complex(row["target"]), "error": row["abs_err"],
            "tolerance": cfg["tol_integrals"], "passed": ok,
        })

    beta = cfg["beta_det"]
    cache = ProfileCache(grid, tol=1e-9)
    p = cache.get(beta)
    lo, hi = cache.neighbors(beta)
    det = nondegeneracy_det(p, lo, hi)
    if beta >= 0.999:
        det_tol = 0.10 * PI4
    elif beta >= 0.99:
        det_tol = 0.25 * PI4
    else:
        det_tol = math.inf          # sign-only below the graded range
    det_ok = det < 0 and abs(det + PI4) < det_tol
    table.append({
        "name": f"interaction_det_beta_{beta:g}",
        "value": complex(det), "target": complex(-PI4),
        "error": abs(det + PI4),
        "tolerance": det_tol, "passed": det_ok,
    })

    lines = ["name,re_value,im_value,re_target,im_target,error,tolerance,"
             "passed"]
    for r in table:
        lines.append(
            f"{r['name']},{r['value'].real!r},{r['value'].imag!r},"
            f"{r['target'].real!r},{r['target'].imag!r},{r['error']!r},"
            f"{r['tolerance']!r},{str(r['passed']).lower()}")
    (run_dir / "oracle.csv").write_text("\n".join(lines) + "\n",
                                        encoding="utf-8")
    for r in table:
        print(f"  {'PASS' if r['passed'] else 'FAIL'}  {r['name']:<28s} "
              f"error {r['error']:.3e}")
    n_pass = sum(r["passed"] for r in table)
    passed = n_pass == len(table)
    if not passed:
        raise NumericalFailure(
            f"oracle: {len(table) - n_pass} of {len(table)} rows out of "
            "tolerance (see oracle.csv)")
    return passed, {"rows_passed": n_pass, "rows_total": len(table),
                    "determinant": det}, ["oracle.csv"]


def _cmd_modulation(cfg: dict, run_dir: Path):
    reg = RegimeConfig(eta=cfg["eta"], delta=cfg["delta"])
    pm = initial_data_t_minus(reg)
    if cfg["span"] == "window":
        t0, t1 = reg.t_minus, reg.t_in
    else:
        t0, t1 = reg.t_minus, 10.0 * reg.t_minus
    cache = None
    if cfg["rhs"] == "sharp":
        cache = ProfileCache(Grid1D(2**15, 400.0), tol=1e-9)
    traj = integrate_system(pm, t0, t1, rhs_kind=cfg["rhs"], cfg=reg,
                            cache=cache, tol=cfg["tol"], n_out=cfg["n_out"])
    modulation_trajectory_to_csv(traj, run_dir / "trajectory.csv")
    report = regime_report(traj, reg)
    report_to_json(report, run_dir / "regime_report.json")
    for name, claim in report["claims"].items():
        print(f"  {'PASS' if claim.get('passes') else 'FAIL'}  {name}")
    return True, {"t_in": reg.t_in, "t_minus": reg.t_minus,
                  "claims": {k: bool(v.get("passes"))
                             for k, v in report["claims"].items()},
                  "flags_raised": len(traj.flags)}, \
        ["trajectory.csv", "regime_report.json"]


def _reduced_csv(traj, path):
    lines = ["t,X,nu,re_zeta1,im_zeta1,re_zeta2,im_zeta2,X_times_nu"]
    for t, s in zip(traj.ts, traj.states):
        r = state_to_reduced(s)
        lines.append(f"{t!r},{r.X!r},{r.nu!r},{r.zeta1.real!r},"
                     f"{r.zeta1.imag!r},{r.zeta2.real!r},{r.zeta2.imag!r},"
                     f"{r.X * r.nu!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cmd_szego(cfg: dict, run_dir: Path):
    outputs = ["trajectory.csv", "conservation.json"]
    if cfg["mode"] == "resonant":
        run = integrate_resonant(X0=cfg["X0"], nu0=cfg["nu0"], M=cfg["M"],
                                 K=cfg["K"], t0=cfg["t0"], t1=cfg["t1"],
                                 tol=max(cfg["tol"], 1e-12),
                                 n_out=cfg["n_out"])
        states = [resonant_to_state(X, nu, G, run.K, run.M)
                  for X, nu, G in zip(run.X, run.nu, run.Gamma)]
        traj = SzegoTrajectory(ts=run.ts, states=states,
                               conserved=[conserved_quantities(s)
                                          for s in states])
        slope = (run.X[-1] * run.nu[-1] - run.X[0] * run.nu[0]) / (
            run.ts[-1] - run.ts[0])
        extra = {"product_law_slope": slope,
                 "expected_slope": -cfg["M"] * cfg["K"] ** 2}
        print(f"  X*nu slope {slope:.6f} (expected "
              f"{-cfg['M'] * cfg['K'] ** 2:.6f})")
    else:
        s0 = SzegoTwoSolitonState(
            alpha1=cfg["alpha1"], alpha2=cfg["alpha2"],
            kappa1=cfg["kappa1"], kappa2=cfg["kappa2"],
            x1=cfg["x1"], x2=cfg["x2"],
        )
        traj = integrate_full(s0, cfg["t0"], cfg["t1"], tol=cfg["tol"],
                              n_out=cfg["n_out"])
        extra = {}
        if cfg["mode"] == "reduced":
            _reduced_csv(traj, run_dir / "reduced.csv")
            outputs.append("reduced.csv")

    szego_trajectory_to_csv(traj, run_dir / "trajectory.csv")
    drifts = traj.drift()
    identity_max = max(c.identity_residual for c in traj.conserved)
    budget = 100.0 * cfg["tol"]
    conservation = {
        "relative_drift": drifts,
        "drift_budget": budget,
        "identity_residual_max": identity_max,
        **extra,
    }
    with open(run_dir / "conservation.json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable(conservation), fh, indent=2, sort_keys=True,
                  ensure_ascii=False)
        fh.write("\n")
    max_drift = max(drifts.values())
    print(f"  max conserved-quantity drift {max_drift:.3e} "
          f"(budget {budget:.1e})")
    if max_drift > budget:
        raise NumericalFailure(
            f"conserved-quantity drift {max_drift:.3e} exceeds "
            f"100*tol = {budget:.1e}")
    return True, conservation, outputs


def _evolve_initial_data(cfg: dict):
    """(u0, equation, evolution kwargs, mod_traj) for each data choice."""
    data = cfg["data"]
    merged = dict(cfg)
    for key, value in _EVOLVE_DEFAULTS[data].items():
        if merged.get(key) is None:
            merged[key] = value
    mod_traj = None

    if data == "qplus":
        grid = Grid1D(merged["n"], merged["length"])
        u0 = sample_q_plus(grid)
        if merged["equation"].startswith("szego"):
            # the grid sampling aliases a small amount of the profile's
            # spectrum below zero frequency; the holomorphic flows require
            # exactly nonnegative-frequency data
            u0 = project_plus(u0)
    elif data == "qbeta":
        prof_cache = ProfileCache(Grid1D(2**15, 400.0), tol=1e-9)
        prof = prof_cache.get(merged["beta"])
        u0 = traveling_wave_data(prof, n=merged["n"])
        merged["length"] = u0.grid.length
    elif data == "two-soliton":
        reg = RegimeConfig(eta=merged["eta"], delta=merged["delta"])
        pm = initial_data_t_minus(reg)
        mod_traj = integrate_system(pm, reg.t_minus, reg.t_in,
                                    rhs_kind="turbulent", cfg=reg,
                                    tol=1e-10, n_out=101)
        p_in = mod_traj.params[0]
        prof_cache = ProfileCache(Grid1D(2**15, 400.0), tol=1e-9)
        profs = (prof_cache.get(p_in.beta1), prof_cache.get(p_in.beta2))
        grid = Grid1D(merged["n"], merged["length"])
        u0 = synth_two_soliton(p_in, profs, grid)
        merged["t0"] = reg.t_in
        if merged["t_end"] is None:
            merged["t_end"] = reg.t_minus - reg.t_in
    else:  # file
        if not merged["file"]:
            raise ValidationError("data=file requires --file PREFIX")
        u0, t_header, eq_header = load_checkpoint(merged["file"])
        if merged["equation"] is None:
            merged["equation"] = eq_header
        merged["t0"] = t_header
        merged["n"] = u0.grid.n
        merged["length"] = u0.grid.length

    return u0, merged, mod_traj


def _cmd_evolve(cfg: dict, run_dir: Path):
    u0, merged, mod_traj = _evolve_initial_data(cfg)
    run_cfg = EvolutionConfig(
        equation=merged["equation"], dt=merged["dt"],
        t_end=merged["t_end"], grid=u0.grid, stride=merged["stride"],
        t0=merged.get("t0", 0.0),
    )
    result = run_with_diagnostics(run_cfg, u0, mod_traj=mod_traj)
    diagnostics_to_csv(result, run_dir / "diagnostics.csv")
    save_checkpoint(result.final_field, result.t_final,
                    merged["equation"], run_dir / "final")
    first, last = result[0], result[-1]
    summary = {
        "equation": merged["equation"], "data": merged["data"],
        "grid": [u0.grid.n, u0.grid.length],
        "dt": merged["dt"], "t_end": merged["t_end"],
        "records": len(result), "halted": result.halted,
        "mass_drift": abs(last.mass - first.mass) / max(first.mass, 1e-30),
        "h1_growth": (last.sobolev[1.0] / first.sobolev[1.0]) ** 2,
    }
    print(f"  {len(result)} records; relative mass drift "
          f"{summary['mass_drift']:.3e}; squared-H1 growth factor "
          f"{summary['h1_growth']:.3f}")
    if result.halted:
        raise NumericalFailure(
            f"run halted on non-finite state at t = {result.t_final:g} "
            "(diagnostics.csv and final checkpoint retain the last good "
            "state)")
    return True, summary, ["diagnostics.csv", "final.field.bin", "final.json"]


def _cmd_check(cfg: dict, run_dir: Path):
    ids = _parse_check_ids(cfg["ids"])
    results = run_all(ids=ids, parallel=bool(cfg["parallel"]))

    lines = ["check_id,name,passed,runtime_s,details"]
    for r in results:
        detail = r.details.replace('"', "'")
        lines.append(f"{r.check_id},{r.name},{str(r.passed).lower()},"
                     f"{r.runtime!r},\"{detail}\"")
        print("  " + r.summary())
    (run_dir / "checks.csv").write_text("\n".join(lines) + "\n",
                                        encoding="utf-8")
    with open(run_dir / "checks.json", "w", encoding="utf-8") as fh:
        json.dump([_jsonable(vars(r)) for r in results], fh, indent=2,
                  sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    n_pass = sum(r.passed for r in results)
    summary = {"passed_checks": n_pass, "total_checks": len(results),
               "failed_ids": [r.check_id for r in results if not r.passed]}
    if n_pass != len(results):
        raise NumericalFailure(
            f"{len(results) - n_pass} of {len(results)} checks failed: "
            f"ids {summary['failed_ids']} (see checks.csv)")
    return True, summary, ["checks.csv", "checks.json"]


_RUNNERS = {
    "profile": _cmd_profile,
    "ground": _cmd_ground,
    "oracle": _cmd_oracle,
    "modulation": _cmd_modulation,
    "szego": _cmd_szego,
    "evolve": _cmd_evolve,
    "check": _cmd_check,
}


# ---------------------------------------------------------------------------
# argument parsing and entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="hwlab",
                     description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for command, params in COMMAND_PARAMS.items():
        p = sub.add_parser(command, help=f"run the {command} recipe")
        for param in params:
            p.add_argument(f"--{param.name.replace('_', '-')}",
                           dest=param.name, default=None, metavar="V",
                           help=f"{param.help} (default {param.default})")
        p.add_argument("--config", default=None, metavar="FILE",
                       help="flat key=value config file (# comments)")
        p.add_argument("--out", default="runs", metavar="DIR",
                       help="output root (env HWLAB_OUT overrides)")
        p.add_argument("--seed", type=int, default=0,
                       help="run seed, echoed into the manifest")
        p.add_argument("--force", action="store_true",
                       help="acknowledge out-of-range parameters")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = resolve_config(args.command, args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        run_dir = make_run_dir(args.out, args.command, config)
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"run directory: {run_dir}")

    t_start = time.perf_counter()
    passed, summary, outputs, error, code = False, {}, [], None, 0
    try:
        passed, summary, outputs = _RUNNERS[args.command](config, run_dir)
    except ValidationError as exc:
        error, code = str(exc), 1
        print(f"error: {exc}", file=sys.stderr)
    except NumericalFailure as exc:
        error, code = str(exc), 2
        print(f"numerical failure: {exc}", file=sys.stderr)
    except Exception as exc:  # library-level failure mid-run
        error, code = f"{type(exc).__name__}: {exc}", 2
        print(f"numerical failure: {error}", file=sys.stderr)
    wall = time.perf_counter() - t_start
    outputs = [str(o) for o in outputs] + [
        f.name for f in run_dir.iterdir() if f.name not in
        {"manifest.json", *outputs}
    ]
    write_manifest(run_dir, args.command, config, passed and code == 0,
                   summary, outputs, wall, error)
    status = "ok" if code == 0 else "failed"
    print(f"{status}: wall time {wall:.2f} s; manifest written")
    return code


if __name__ == "__main__":
    sys.exit(main())
