"""Batch front end: config-driven pipelines with CSV artifacts.

Usage: conicwave <command> --config <path> [--out <dir>]

Commands map one-to-one onto the library pipelines: describe, potential,
jost, coeffs, validate-low, validate-high, kernel, decay, statphase.
Configs are strict JSON documents: unknown keys are errors, grids are
{min, max, count, scale} with scale "linear" or "log".  All floating-point
output is printed with 17 significant digits so reruns are byte-identical.

Exit status: 0 all checks pass, 2 flagged residuals, 1 hard error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, ConicwaveError
from .geometry import (ArclengthChart, PotentialProfile, fit_conical_constants,
                       make_profile)
from .jost import ScatteringModel
from .kernel import (BANDS, KINDS, KernelEngine, SUP_GRID,
                     standard_case_library, stationary_phase_check)

COMMANDS = ("describe", "potential", "jost", "coeffs", "validate-low",
            "validate-high", "kernel", "decay", "statphase")

_TOP_KEYS = {"profile", "command", "out", "lam_grid", "t_grid", "xi_grid",
             "kind", "band", "tolerances", "lam_low"}
_PROFILE_KEYS = {"kind", "params", "d", "x_max", "conical_left",
                 "conical_right"}
_GRID_KEYS = {"min", "max", "count", "scale"}

_GRID_DEFAULTS = {
    "validate-low": {"lam_grid": {"min": 1e-6, "max": 1e-2, "count": 25,
                                  "scale": "log"}},
    "validate-high": {"lam_grid": {"min": 1.0, "max": 100.0, "count": 10,
                                   "scale": "log"}},
    "decay": {"t_grid": {"min": 10.0, "max": 1e4, "count": 13,
                         "scale": "log"}},
}


@dataclass
class RunConfig:
    """Validated run configuration."""

    profile: dict
    command: str
    out: Optional[str] = None
    lam_grid: Optional[np.ndarray] = None
    t_grid: Optional[np.ndarray] = None
    xi_grid: Optional[np.ndarray] = None
    kind: str = "schrodinger"
    band: Optional[str] = None
    lam_low: Optional[float] = None
    tolerances: dict = field(default_factory=dict)


@dataclass
class ValidationSummary:
    """Per-check validation outcome table."""

    rows: list

    @property
    def all_ok(self) -> bool:
        return all(r["status"] == "pass" for r in self.rows)


def _parse_grid(doc, name: str) -> np.ndarray:
    if not isinstance(doc, dict):
        raise ConfigError(f"{name} must be an object with min/max/count/scale")
    unknown = set(doc) - _GRID_KEYS
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    try:
        lo = float(doc["min"])
        hi = float(doc["max"])
        count = int(doc["count"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{name} needs numeric min/max/count") from exc
    scale = doc.get("scale", "linear")
    if count < 1:
        raise ConfigError(f"{name}: count must be >= 1")
    if not lo < hi:
        raise ConfigError(f"{name}: min must be < max")
    if scale == "log":
        if lo <= 0:
            raise ConfigError(f"{name}: log-scale grids require min > 0")
        return np.geomspace(lo, hi, count)
    if scale != "linear":
        raise ConfigError(f"{name}: scale must be 'linear' or 'log'")
    return np.linspace(lo, hi, count)


def load_config(path) -> RunConfig:
    """Load and validate a JSON run configuration (strict keys)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "profile" not in doc or "command" not in doc:
        raise ConfigError("config requires 'profile' and 'command'")
    profile = doc["profile"]
    if not isinstance(profile, dict):
        raise ConfigError("profile must be an object")
    unknown = set(profile) - _PROFILE_KEYS
    if unknown:
        raise ConfigError(f"unknown profile keys: {sorted(unknown)}")
    command = doc["command"]
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    cfg = RunConfig(profile=profile, command=command, out=doc.get("out"))
    defaults = _GRID_DEFAULTS.get(command, {})
    for gname in ("lam_grid", "t_grid", "xi_grid"):
        src = doc.get(gname, defaults.get(gname))
        if src is not None:
            setattr(cfg, gname, _parse_grid(src, gname))
    kind = doc.get("kind", "schrodinger")
    if kind not in KINDS:
        raise ConfigError(f"unknown kernel kind {kind!r}")
    cfg.kind = kind
    band = doc.get("band")
    if band is not None and band not in BANDS:
        raise ConfigError(f"unknown band {band!r}")
    cfg.band = band
    if "lam_low" in doc:
        cfg.lam_low = float(doc["lam_low"])
    tol = doc.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("tolerances must be an object")
    cfg.tolerances = tol
    return cfg


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _n_workers() -> int:
    raw = os.environ.get("CONIC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError("CONIC_THREADS must be a positive integer") from exc
    if n < 1:
        raise ConfigError("CONIC_THREADS must be a positive integer")
    return n


def _scan(fn, items):
    """Ordered map over items, optionally threaded (CONIC_THREADS)."""
    n = _n_workers()
    if n == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _build_model(cfg: RunConfig) -> ScatteringModel:
    profile = make_profile(cfg.profile)
    x_max = float(cfg.profile.get("x_max", 1.0e5))
    chart = ArclengthChart(profile, x_max=x_max)
    pot = PotentialProfile(profile, chart)
    if cfg.lam_low is not None:
        return ScatteringModel(profile, chart, pot, lam_low=cfg.lam_low)
    return ScatteringModel(profile, chart, pot)


def _cmd_describe(cfg, out: Path) -> int:
    model = _build_model(cfg)
    prof, chart, pot = model.profile, model.chart, model.pot
    lines = [
        f"profile kind: {prof.kind}",
        f"params: {json.dumps(prof.params, default=float, sort_keys=True)}",
        f"d: {prof.d}",
        f"symmetric: {prof.symmetric}",
        f"conical: left={prof.conical_left} right={prof.conical_right}",
        f"x_max: {_fmt(chart.x_max)}",
        f"xi image: [{_fmt(chart.xi_min)}, {_fmt(chart.xi_max)}]",
        f"C2 (sup xi^2 |V|): {_fmt(pot.C2)}",
        f"C3 (sup |xi^3 V1|): {_fmt(pot.C3)}",
    ]
    for side in ("right", "left"):
        flag = prof.conical_right if side == "right" else prof.conical_left
        if flag:
            fit = fit_conical_constants(chart, side)
            lines.append(f"c_inf[{side}]: {_fmt(fit.c_inf)} "
                         f"(resid_coeff {_fmt(fit.resid_coeff)})")
    text = "\n".join(lines) + "\n"
    (out / "describe.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def _cmd_potential(cfg, out: Path) -> int:
    model = _build_model(cfg)
    grid = cfg.xi_grid
    if grid is None:
        raise ConfigError("potential command requires xi_grid")
    rows = []
    for xi in grid:
        rho = float(model.pot.rho(xi))
        V = float(model.pot.V(xi))
        rows.append((xi, rho, V, xi * xi * V))
    _write_csv(out / "potential.csv", ["xi", "rho", "V", "xi2V"], rows)
    return 0


def _cmd_jost(cfg, out: Path) -> int:
    model = _build_model(cfg)
    if cfg.lam_grid is None or cfg.xi_grid is None:
        raise ConfigError("jost command requires lam_grid and xi_grid")
    rows = []
    for lam in cfg.lam_grid:
        ev = model.jost_plus(float(lam), xi_min=float(np.min(cfg.xi_grid)),
                             xi_hi=float(np.max(cfg.xi_grid)))
        v, d = ev.values(cfg.xi_grid)
        for xi, fv, fd in zip(cfg.xi_grid, v, d):
            rows.append((lam, xi, fv.real, fv.imag, fd.real, fd.imag,
                         ev.regime))
    _write_csv(out / "jost.csv",
               ["lambda", "xi", "re_f", "im_f", "re_df", "im_df", "regime"],
               rows)
    return 0


def _cmd_coeffs(cfg, out: Path) -> int:
    model = _build_model(cfg)
    if cfg.lam_grid is None:
        raise ConfigError("coeffs command requires lam_grid")
    res_names = ["wronskian_constancy", "connection_identity", "beta_from_W",
                 "unitarity", "lower_bound"]
    rows = []
    for lam in cfg.lam_grid:
        sd = model.scattering_data(float(lam))
        rows.append((lam,
                     sd.a_plus.real, sd.a_plus.imag,
                     sd.b_plus.real, sd.b_plus.imag,
                     sd.a_minus.real, sd.a_minus.imag,
                     sd.b_minus.real, sd.b_minus.imag,
                     sd.W.real, sd.W.imag,
                     sd.alpha_minus.real, sd.alpha_minus.imag,
                     sd.beta_minus.real, sd.beta_minus.imag,
                     *[sd.residuals[k] for k in res_names]))
    hdr = ["lambda", "re_a_plus", "im_a_plus", "re_b_plus", "im_b_plus",
           "re_a_minus", "im_a_minus", "re_b_minus", "im_b_minus",
           "re_W", "im_W", "re_alpha_minus", "im_alpha_minus",
           "re_beta_minus", "im_beta_minus"] + [f"res_{k}" for k in res_names]
    _write_csv(out / "coeffs.csv", hdr, rows)
    return 0


def _summary_from_report(report: dict) -> ValidationSummary:
    rows = []
    for name, rec in report.items():
        consts = rec.get("constants", {})
        rows.append({
            "check": name,
            "law": rec.get("law", ""),
            "constants": json.dumps({k: float(v) for k, v in consts.items()},
                                    sort_keys=True),
            "worst_residual": rec["value"],
            "threshold": rec.get("threshold", np.nan),
            "status": "pass" if rec["ok"] else "flag",
        })
    return ValidationSummary(rows=rows)


def _emit_summary(summary: ValidationSummary, out: Path, stem: str) -> int:
    hdr = ["check", "law", "constants", "worst_residual", "threshold",
           "status"]
    _write_csv(out / f"{stem}.csv", hdr,
               [[r[k] for k in hdr] for r in summary.rows])
    lines = []
    for r in summary.rows:
        lines.append(f"[{r['status']:>4}] {r['check']}: "
                     f"residual {_fmt(r['worst_residual'])} "
                     f"(threshold {_fmt(r['threshold'])})  {r['law']}")
    text = "\n".join(lines) + "\n"
    (out / f"{stem}.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0 if summary.all_ok else 2


def _cmd_validate_low(cfg, out: Path) -> int:
    model = _build_model(cfg)
    consts, report = model.validate_low_energy(cfg.lam_grid)
    summary = _summary_from_report(report)
    return _emit_summary(summary, out, "validate_low")


def _cmd_validate_high(cfg, out: Path) -> int:
    model = _build_model(cfg)
    report = model.validate_high_energy(cfg.lam_grid)
    summary = _summary_from_report(report)
    return _emit_summary(summary, out, "validate_high")


def _kernel_engine(cfg) -> KernelEngine:
    model = _build_model(cfg)
    span = 1.0e3
    if cfg.xi_grid is not None:
        span = max(span, float(np.max(np.abs(cfg.xi_grid))))
    if cfg.t_grid is not None:
        span = max(span, min(float(np.max(cfg.t_grid)),
                             0.9 * model.pot.xi_cap))
    return KernelEngine(model, xi_abs_max=1.05 * span)


def _cmd_kernel(cfg, out: Path) -> int:
    if cfg.t_grid is None or cfg.xi_grid is None:
        raise ConfigError("kernel command requires t_grid and xi_grid")
    eng = _kernel_engine(cfg)
    pts = np.asarray(cfg.xi_grid, dtype=float)
    jobs = [(t, xi, xip) for t in cfg.t_grid
            for i, xi in enumerate(pts) for xip in pts[: i + 1]]

    def one(job):
        t, xi, xip = job
        if cfg.band:
            return eng.band_kernel(cfg.kind, cfg.band, float(t), float(xi),
                                   float(xip))
        return eng.evolution_kernel(cfg.kind, float(t), float(xi), float(xip))

    rows = []
    for ks in _scan(one, jobs):
        rows.append((ks.kind, ks.t, ks.xi, ks.xi_prime, ks.value.real,
                     ks.value.imag, abs(ks.value), ks.err_est))
    _write_csv(out / "kernel.csv",
               ["kind", "t", "xi", "xi_prime", "re_value", "im_value",
                "abs_weighted", "err_est"], rows)
    return 0


def _cmd_decay(cfg, out: Path) -> int:
    eng = _kernel_engine(cfg)
    spatial = cfg.xi_grid if cfg.xi_grid is not None else np.asarray(SUP_GRID)
    rep = eng.decay_scan(cfg.kind, cfg.t_grid, spatial_grid=spatial,
                         band=cfg.band)
    rows = [(rep.kind, t, s, rep.fit_alpha, rep.fit_C, rep.fit_R2)
            for t, s in zip(rep.t_grid, rep.sup_abs)]
    _write_csv(out / "decay.csv",
               ["kind", "t", "sup_abs", "fit_alpha", "fit_C", "fit_R2"], rows)
    tol = float(cfg.tolerances.get("alpha_window", 0.15))
    ok = (abs(rep.fit_alpha - rep.target_alpha) <= tol and rep.fit_R2 >= 0.95)
    sys.stdout.write(f"decay fit: alpha={_fmt(rep.fit_alpha)} "
                     f"(target {_fmt(rep.target_alpha)}), "
                     f"R2={_fmt(rep.fit_R2)}\n")
    return 0 if ok else 2


def _cmd_statphase(cfg, out: Path) -> int:
    cases = standard_case_library()
    rows = []
    worst_ratio = 0.0
    oracle_fail = False
    for case in cases:
        lhs, rhs = stationary_phase_check(case)
        ratio = lhs / rhs if rhs > 0 else np.inf
        worst_ratio = max(worst_ratio, ratio)
        oracle_err = np.nan
        if case.oracle is not None:
            oracle_err = abs(lhs - abs(case.oracle))
            if oracle_err > 1e-6:
                oracle_fail = True
        rows.append((case.label, case.t, lhs, rhs, ratio, oracle_err))
    _write_csv(out / "statphase.csv",
               ["case", "t", "lhs", "rhs", "ratio", "oracle_abs_err"], rows)
    sys.stdout.write(f"statphase: C_sp = {_fmt(worst_ratio)} over "
                     f"{len(cases)} cases\n")
    cap = float(cfg.tolerances.get("c_sp_cap", 10.0))
    return 0 if (worst_ratio <= cap and not oracle_fail) else 2


_DISPATCH = {
    "describe": _cmd_describe,
    "potential": _cmd_potential,
    "jost": _cmd_jost,
    "coeffs": _cmd_coeffs,
    "validate-low": _cmd_validate_low,
    "validate-high": _cmd_validate_high,
    "kernel": _cmd_kernel,
    "decay": _cmd_decay,
    "statphase": _cmd_statphase,
}


def run(cfg: RunConfig, out_dir=None) -> int:
    """Execute a validated configuration; returns the exit status."""
    out = Path(out_dir if out_dir is not None else (cfg.out or "."))
    out.mkdir(parents=True, exist_ok=True)
    return _DISPATCH[cfg.command](cfg, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="conicwave",
        description="Scattering and dispersive-decay toolkit for surfaces "
                    "with conical ends")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.command != args.command:
            raise ConfigError(f"config command {cfg.command!r} does not "
                              f"match CLI command {args.command!r}")
        return run(cfg, args.out)
    except ConicwaveError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
