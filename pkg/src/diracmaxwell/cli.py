"""Command-line entry point.

Commands: run-dm, run-sp, run-pauli, converge, seminonrel, probe-dyadic,
check <suite>.  Configs are JSON files or ``preset:<name>``; every command
writes a manifest with the config hash and seed so reruns are comparable
byte for byte (wall-clock fields aside).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import data_families as df
from . import spinors as sp
from .evolve_dm import DIAGNOSTIC_COLUMNS, DMState, StepConfig, simulate_dm
from .evolve_limits import GaugeSource, PauliState, SPState, simulate_pauli, simulate_sp
from .fourier import make_lattice, write_fld
from .presets import get_preset
from .studies import ExperimentConfig, dyadic_sweep, nonrel_convergence_study, seminonrel_study


class ConfigError(Exception):
    """Validation failure; the message names the offending field."""


def _need(cfg: dict, key: str, path: str = ""):
    if key not in cfg:
        raise ConfigError(f"config error at {path or key}: missing required field {key!r}")
    return cfg[key]


def _validate_grid(cfg: dict) -> tuple:
    grid = _need(cfg, "grid")
    n = _need(grid, "n", "grid.n")
    if not isinstance(n, int) or n % 2 != 0 or n < 4:
        raise ConfigError(f"config error at grid.n: must be an even integer >= 4, got {n!r}")
    period = _need(grid, "period", "grid.period")
    if not (period > 0):
        raise ConfigError(f"config error at grid.period: must be positive, got {period!r}")
    return n, float(period)


def load_config(spec: str) -> dict:
    if spec.startswith("preset:"):
        try:
            return get_preset(spec.split(":", 1)[1])
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"config file not found: {spec}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config error: invalid JSON in {spec}: {exc}")


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def write_manifest(out_dir: Path, cfg: dict, seed: int, stages: dict, outputs: list):
    manifest = {
        "config_hash": config_hash(cfg),
        "seed": seed,
        "code_version": __version__,
        "wall_clock": {k: round(v, 6) for k, v in stages.items()},
        "outputs": sorted(Path(p).name for p in outputs),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(x) if isinstance(x, float) else str(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


# -- run commands -------------------------------------------------------------


def cmd_run_dm(cfg: dict, out_dir: Path, seed: int, dealias: bool) -> int:
    n, period = _validate_grid(cfg)
    eps = float(_need(cfg, "eps"))
    if not (eps > 0):
        raise ConfigError(f"config error at eps: must be positive, got {eps}")
    T = float(_need(cfg, "T"))
    dt = float(_need(cfg, "dt"))
    data = _need(cfg, "data")
    lat = make_lattice(n, period)
    t0 = time.time()
    psi0 = df.spinor_data(lat, _need(data, "family", "data.family"), eps, data.get("params"))
    a0, a1 = df.gauge_data(lat, cfg.get("gauge", "zero"), data.get("params"))
    init = DMState(lat, 0.0, psi0, a0, a1, eps)
    step_cfg = StepConfig(dt=dt, sample_every=int(cfg.get("sample_every", 1)), dealias=dealias)
    traj = simulate_dm(init, T, step_cfg)
    t1 = time.time()
    outputs = []
    for i, (t, psi) in enumerate(zip(traj.times, traj.psis)):
        p = out_dir / f"psi_{i:04d}.fld"
        write_fld(p, lat, psi, t)
        outputs.append(p)
    p = out_dir / "A_final.fld"
    write_fld(p, lat, traj.As[-1], traj.times[-1])
    outputs.append(p)
    diag_path = out_dir / "diagnostics.csv"
    rows = list(zip(*[traj.diagnostics[c] for c in DIAGNOSTIC_COLUMNS]))
    _write_csv(diag_path, DIAGNOSTIC_COLUMNS, [tuple(float(x) for x in r) for r in rows])
    outputs.append(diag_path)
    outputs.append(write_manifest(out_dir, cfg, seed, {"simulate": t1 - t0, "write": time.time() - t1}, outputs))
    print(f"run-dm: {len(traj.times)} samples -> {out_dir}")
    return 0


def cmd_run_sp(cfg: dict, out_dir: Path, seed: int) -> int:
    n, period = _validate_grid(cfg)
    T = float(_need(cfg, "T"))
    dt = float(_need(cfg, "dt"))
    data = _need(cfg, "data")
    lat = make_lattice(n, period)
    t0 = time.time()
    v0p, v0m = df.limit_data(lat, _need(data, "family", "data.family"), data.get("params"))
    traj = simulate_sp(SPState(lat, 0.0, v0p, v0m), T, dt, sample_every=int(cfg.get("sample_every", 1)))
    t1 = time.time()
    outputs = []
    for i, (t, vp) in enumerate(zip(traj.times, traj.v_plus)):
        p = out_dir / f"vplus_{i:04d}.fld"
        write_fld(p, lat, vp, t)
        outputs.append(p)
    diag_path = out_dir / "diagnostics.csv"
    cols = list(traj.diagnostics)
    rows = list(zip(*[traj.diagnostics[c] for c in cols]))
    _write_csv(diag_path, cols, [tuple(float(x) for x in r) for r in rows])
    outputs.append(diag_path)
    outputs.append(write_manifest(out_dir, cfg, seed, {"simulate": t1 - t0, "write": time.time() - t1}, outputs))
    print(f"run-sp: {len(traj.times)} samples -> {out_dir}")
    return 0


def cmd_run_pauli(cfg: dict, out_dir: Path, seed: int) -> int:
    """Couples a DM run (for the gauge fields) with the Pauli evolution."""
    n, period = _validate_grid(cfg)
    eps = float(_need(cfg, "eps"))
    T = float(_need(cfg, "T"))
    dt = float(_need(cfg, "dt"))
    data = _need(cfg, "data")
    lat = make_lattice(n, period)
    t0 = time.time()
    psi0 = df.spinor_data(lat, _need(data, "family", "data.family"), eps, data.get("params"))
    a0, a1 = df.gauge_data(lat, cfg.get("gauge", "zero"), data.get("params"))
    init = DMState(lat, 0.0, psi0, a0, a1, eps)
    traj = simulate_dm(init, T, StepConfig(dt=dt, sample_every=int(cfg.get("sample_every", 1)), store_gauge=True))
    gauge = GaugeSource.from_trajectory(traj)
    chi0 = sp.upper(psi0)
    pauli = simulate_pauli(PauliState(lat, 0.0, chi0, eps), gauge, T, dt,
                           sample_every=int(cfg.get("sample_every", 1)))
    t1 = time.time()
    outputs = []
    for i, (t, chi) in enumerate(zip(pauli.times, pauli.chis)):
        p = out_dir / f"chi_{i:04d}.fld"
        write_fld(p, lat, chi, t)
        outputs.append(p)
    diag_path = out_dir / "diagnostics.csv"
    cols = list(pauli.diagnostics)
    rows = list(zip(*[pauli.diagnostics[c] for c in cols]))
    _write_csv(diag_path, cols, [tuple(float(x) for x in r) for r in rows])
    outputs.append(diag_path)
    outputs.append(write_manifest(out_dir, cfg, seed, {"simulate": t1 - t0, "write": time.time() - t1}, outputs))
    print(f"run-pauli: {len(pauli.times)} samples -> {out_dir}")
    return 0


def _experiment_config(cfg: dict, seed: int) -> ExperimentConfig:
    n, period = _validate_grid(cfg)
    eps_list = _need(cfg, "eps_list")
    if len(eps_list) < 3:
        raise ConfigError(
            f"config error at eps_list: rate fits need >= 3 eps values, got {len(eps_list)}"
        )
    data = _need(cfg, "data")
    return ExperimentConfig(
        n=n,
        period=period,
        eps_list=[float(e) for e in eps_list],
        T=float(_need(cfg, "T")),
        dt_ref=float(_need(cfg, "dt_ref")),
        eps_ref=float(cfg.get("eps_ref", eps_list[0])),
        dt_schedule=cfg.get("dt_schedule", "eps_linear"),
        family=_need(data, "family", "data.family"),
        params=data.get("params", {}),
        gauge=cfg.get("gauge", "zero"),
        sample_every=int(cfg.get("sample_every", 10)),
        seed=seed,
    )


def cmd_converge(cfg: dict, out_dir: Path, seed: int, study) -> int:
    t0 = time.time()
    try:
        exp_cfg = _experiment_config(cfg, seed)
    except ValueError as exc:
        raise ConfigError(f"config error: {exc}") from None
    report = study(exp_cfg)
    outputs = []
    json_path = out_dir / "rate_report.json"
    json_path.write_text(report.to_json() + "\n")
    outputs.append(json_path)
    csv_path = out_dir / "rate_report.csv"
    _write_csv(csv_path, report.to_csv_rows()[0], report.to_csv_rows()[1:])
    outputs.append(csv_path)
    outputs.append(write_manifest(out_dir, cfg, seed, {"study": time.time() - t0}, outputs))
    print(f"rates: { {k: v for k, v in report.rates.items()} }")
    print(f"report -> {json_path}")
    return 0


def cmd_probe(cfg: dict, out_dir: Path, seed: int) -> int:
    n, period = _validate_grid(cfg)
    case = _need(cfg, "case")
    t0 = time.time()
    rows = dyadic_sweep(
        case,
        n,
        period,
        float(_need(cfg, "eps")),
        [float(m) for m in _need(cfg, "mu_list")],
        [float(m) for m in _need(cfg, "lam_list")],
        trials=int(cfg.get("trials", 8)),
        seed=seed,
        T=float(cfg.get("T", 1.0)),
        dt=float(cfg.get("dt", 0.02)),
    )
    outputs = []
    csv_path = out_dir / "sweep.csv"
    _write_csv(csv_path, ("mu", "lambda", "eps", "trial", "ratio"), rows)
    outputs.append(csv_path)
    outputs.append(write_manifest(out_dir, cfg, seed, {"probe": time.time() - t0}, outputs))
    ratios = np.array([r[-1] for r in rows])
    print(f"probe case {case}: {len(rows)} cells, max ratio {ratios.max():.4f}")
    return 0


# -- check suites ---------------------------------------------------------------


def _suite_matrices() -> list:
    results = []
    for j in range(3):
        for k in range(3):
            anti = sp.ALPHA[j] @ sp.ALPHA[k] + sp.ALPHA[k] @ sp.ALPHA[j] - 2 * (j == k) * np.eye(4)
            results.append((f"anticommute_{j}{k}", float(np.abs(anti).max()), 1e-15))
            prod = sp.ALPHA[j] @ sp.ALPHA[k] - (
                (j == k) * np.eye(4)
                + 1j * sum(sp.LEVI_CIVITA[j, k, l] * sp.SPIN[l] for l in range(3))
            )
            results.append((f"spin_identity_{j}{k}", float(np.abs(prod).max()), 1e-15))
    results.append(("gamma0_sq", float(np.abs(sp.GAMMA0 @ sp.GAMMA0 - np.eye(4)).max()), 1e-15))
    herm = max(
        float(np.abs(m - m.conj().T).max()) for m in (sp.GAMMA0, *sp.ALPHA)
    )
    results.append(("hermitian", herm, 1e-15))
    return results


def _suite_projections(seed: int = 0) -> list:
    lat = make_lattice(16, 6.283185307179586)
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal((4, 16, 16, 16)) + 1j * rng.standard_normal((4, 16, 16, 16))
    from .fourier import lambda_eps

    results = []
    for eps in (1.0, 0.5, 0.25):
        pp = sp.pi_eps(lat, psi, eps, +1)
        pm = sp.pi_eps(lat, psi, eps, -1)
        results.append((f"completeness_eps{eps}", float(np.abs(pp + pm - psi).max()), 1e-12))
        results.append((f"idempotent_eps{eps}", float(np.abs(sp.pi_eps(lat, pp, eps, +1) - pp).max()), 1e-12))
        results.append((f"orthogonal_eps{eps}", float(np.abs(sp.pi_eps(lat, pm, eps, +1)).max()), 1e-12))
        q = sp.free_dirac_apply(lat, psi, eps)
        results.append(
            (
                f"spectral_decomp_eps{eps}",
                float(np.abs(q - (lambda_eps(lat, pp, eps, 1) - lambda_eps(lat, pm, eps, 1))).max()),
                1e-12,
            )
        )
    return results


def _suite_symbols() -> list:
    lat = make_lattice(16, 6.283185307179586)
    k_abs = lat.k_abs
    k_sq = lat.k_sq
    results = []
    for eps in (0.125, 0.25, 0.5, 1.0):
        sym = 1.0 - 1.0 / np.sqrt(1.0 + eps**2 * k_sq)
        lower_ok = float((-sym).max())
        upper = np.minimum(1.0, np.minimum(eps * k_abs, eps**2 * k_sq))
        upper_ok = float((sym - upper).max())
        results.append((f"one_minus_invlambda_lower_eps{eps}", max(lower_ok, 0.0), 1e-15))
        results.append((f"one_minus_invlambda_upper_eps{eps}", max(upper_ok, 0.0), 1e-15))
        nz = k_sq > 0
        h = k_sq / (1.0 + np.sqrt(1.0 + eps**2 * k_sq))
        gap = k_abs[nz] / eps - h[nz]
        results.append((f"dispersion_gap_lower_eps{eps}", max(float((-gap).max()), 0.0), 1e-15))
        results.append((f"dispersion_gap_upper_eps{eps}", max(float((gap - 1.0 / eps**2).max()), 0.0), 1e-15))
    return results


def _suite_null1(seed: int = 0) -> list:
    from .fourier import dealias, leray_project
    from .harness import null_identity_one_residual

    lat = make_lattice(24, 6.283185307179586)
    rng = np.random.default_rng(seed)
    results = []
    for trial in range(3):
        A = np.stack([rng.standard_normal((24, 24, 24)) for _ in range(3)])
        A = leray_project(lat, dealias(lat, A))
        A -= A.mean(axis=(1, 2, 3), keepdims=True)
        psi = dealias(
            lat, rng.standard_normal((4, 24, 24, 24)) + 1j * rng.standard_normal((4, 24, 24, 24))
        )
        results.append((f"null_identity_1_trial{trial}", null_identity_one_residual(lat, A, psi), 1e-10))
    return results


def _suite_null2() -> list:
    from .data_families import gauge_profile, v_plus_profile, v_minus_profile
    from .evolve_dm import build_U, free_dirac_trajectory
    from .harness import null_identity_check

    lat = make_lattice(16, 6.283185307179586)
    eps, T, dt = 0.5, 0.25, 1e-3
    psi0 = sp.pi_eps(lat, sp.embed_upper(v_plus_profile(lat, 0.5)), eps, +1) + sp.pi_eps(
        lat, sp.embed_lower(v_minus_profile(lat, 0.3)), eps, -1
    )
    times = np.arange(0, T + dt / 2, dt)
    psis, dtpsis = free_dirac_trajectory(lat, psi0, times, eps)
    U, dtU = build_U(lat, psis, dt, eps, dtpsi_series=dtpsis)
    Aprof = gauge_profile(lat, 0.2)
    om = 1.3
    t = times[-1]
    A_t = np.cos(om * t) * Aprof
    W_t = -eps * om * np.sin(om * t) * Aprof
    r1, r2 = null_identity_check(lat, None, A_t, W_t, psis[-1], U[-1], dtU[-1], eps)
    return [("null_identity_1_freedirac", r1, 1e-10), ("null_identity_2_freedirac", r2, 1e-5)]


def _suite_squared_dirac() -> list:
    from .harness import squared_dirac_residuals

    lat = make_lattice(12, 6.283185307179586)
    eps = 0.25
    psi0 = df.spinor_data(lat, "upper_projected", eps, {"amplitude": 0.5})
    a0, a1 = df.gauge_data(lat, "bandlimited_divfree", {"gauge_amplitude": 0.2})
    results = []
    res_prev = None
    for dt in (2e-3, 1e-3):
        init = DMState(lat, 0.0, psi0.copy(), a0.copy(), a1.copy(), eps)
        traj = simulate_dm(init, 0.1, StepConfig(dt=dt, sample_every=1))
        res = float(np.max(squared_dirac_residuals(traj)))
        results.append((f"squared_dirac_dt{dt}", res, 1.0))
        if res_prev is not None:
            ratio = res_prev / res
            results.append(("squared_dirac_halving_ratio_ge_3", 3.0 - min(ratio, 3.0), 1e-9))
        res_prev = res
    return results


CHECK_SUITES = {
    "matrices": _suite_matrices,
    "projections": _suite_projections,
    "symbols": _suite_symbols,
    "null-1": _suite_null1,
    "null-2": _suite_null2,
    "squared-dirac": _suite_squared_dirac,
}


def cmd_check(suite: str, seed: int = 0) -> int:
    if suite not in CHECK_SUITES:
        print(f"unknown suite {suite!r}; have {sorted(CHECK_SUITES)}", file=sys.stderr)
        return 2
    fn = CHECK_SUITES[suite]
    results = fn(seed) if suite in ("projections", "null-1") else fn()
    failed = 0
    for name, residual, tol in results:
        ok = residual <= tol
        failed += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'} {name}: residual {residual:.3e} (tol {tol:.1e})")
    return 1 if failed else 0


# -- entry point ------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dmx", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="JSON config path or preset:<name>")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--dealias", action="store_true")
        p.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs are sequential per cell")

    for name in ("run-dm", "run-sp", "run-pauli", "converge", "seminonrel", "probe-dyadic"):
        add_common(sub.add_parser(name))
    check_p = sub.add_parser("check")
    check_p.add_argument("suite")
    check_p.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    if args.command == "check":
        return cmd_check(args.suite, args.seed)

    try:
        cfg = load_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "run-dm":
            return cmd_run_dm(cfg, out_dir, args.seed, args.dealias)
        if args.command == "run-sp":
            return cmd_run_sp(cfg, out_dir, args.seed)
        if args.command == "run-pauli":
            return cmd_run_pauli(cfg, out_dir, args.seed)
        if args.command == "converge":
            return cmd_converge(cfg, out_dir, args.seed, nonrel_convergence_study)
        if args.command == "seminonrel":
            return cmd_converge(cfg, out_dir, args.seed, seminonrel_study)
        if args.command == "probe-dyadic":
            return cmd_probe(cfg, out_dir, args.seed)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
