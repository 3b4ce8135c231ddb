"""Convergence-rate experiments and dyadic spacetime-estimate probes.

The rate studies run the coupled solver against the limit solvers over a
decreasing eps list, record the theorem's error norms at sample times, and
fit log2(error) against log2(eps).  The dyadic probes evolve LP-localized
data under the exact free flows and compare spacetime L2 norms of products
against the claimed right-hand sides.
"""

from __future__ import annotations

import json
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import data_families as df
from . import spinors as sp
from .evolve_dm import DMState, StepConfig, derived_A0, simulate_dm
from .evolve_limits import GaugeSource, PauliState, SPState, simulate_pauli, simulate_sp
from .fourier import Lattice, bump_profile, curl, littlewood_paley, lp_norm, make_lattice, sobolev_norm

# -- configuration ---------------------------------------------------------------


@dataclass
class ExperimentConfig:
    n: int
    period: float
    eps_list: list
    T: float
    dt_ref: float                 # dt at eps_ref; scaled per the schedule
    eps_ref: float = 0.4
    dt_schedule: str = "eps_squared"   # "fixed" | "eps_linear" | "eps_squared"
    family: str = "upper_projected"
    params: dict = field(default_factory=dict)
    gauge: str = "zero"
    sample_every: int = 10
    seed: int = 0

    def __post_init__(self):
        eps = list(self.eps_list)
        if len(eps) != len(set(eps)) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        if self.dt_schedule not in ("fixed", "eps_linear", "eps_squared"):
            raise ValueError(f"unknown dt_schedule {self.dt_schedule!r}")

    def dt_for(self, eps: float) -> float:
        if self.dt_schedule == "fixed":
            return self.dt_ref
        if self.dt_schedule == "eps_linear":
            return self.dt_ref * eps / self.eps_ref
        return self.dt_ref * (eps / self.eps_ref) ** 2

    def lattice(self) -> Lattice:
        return make_lattice(self.n, self.period)


def fit_rate(eps_list, errors):
    """Least-squares slope of log2(error) vs log2(eps); returns (rate, resid).

    The rate is the convergence order: error ~ C eps^rate.  Undefined (nan)
    when fewer than 3 points or any error is at roundoff level.
    """
    eps_arr = np.asarray(eps_list, dtype=float)
    err = np.asarray(errors, dtype=float)
    if len(eps_arr) < 3:
        raise ValueError("rate fit needs at least 3 eps values")
    if np.any(err < 1e-13):
        return float("nan"), float("nan")
    x = np.log2(eps_arr)
    y = np.log2(err)
    coef, res = np.polyfit(x, y, 1, full=True)[:2]
    resid = float(np.sqrt(res[0] / len(x))) if len(res) else 0.0
    return float(coef[0]), resid


@dataclass
class RateReport:
    eps_list: list
    errors: dict                  # norm name -> list of sup-in-time errors
    rates: dict                   # norm name -> fitted rate (nan = undefined)
    fit_residuals: dict
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        def clean(x):
            if isinstance(x, float) and np.isnan(x):
                return "undefined"
            return x

        payload = {
            "eps_list": list(self.eps_list),
            "errors": {k: list(map(float, v)) for k, v in self.errors.items()},
            "rates": {k: clean(float(v) if not np.isnan(v) else v) for k, v in self.rates.items()},
            "fit_residuals": {k: clean(v) for k, v in self.fit_residuals.items()},
            "meta": self.meta,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_csv_rows(self):
        rows = [("norm", "eps", "error")]
        for name in sorted(self.errors):
            for e, v in zip(self.eps_list, self.errors[name]):
                rows.append((name, repr(float(e)), repr(float(v))))
        return rows


# -- nonrelativistic limit study ----------------------------------------------------


def _dm_run(cfg: ExperimentConfig, eps: float, store_gauge: bool = False):
    lat = cfg.lattice()
    psi0 = df.spinor_data(lat, cfg.family, eps, cfg.params)
    a0, a1 = df.gauge_data(lat, cfg.gauge, cfg.params)
    init = DMState(lat, 0.0, psi0, a0, a1, eps)
    dt = cfg.dt_for(eps)
    steps = int(round(cfg.T / dt))
    dt = cfg.T / steps
    # sample on the eps-independent grid of multiples of dt_ref * sample_every
    sample_every = max(1, int(round(cfg.dt_ref * cfg.sample_every / dt)))
    step_cfg = StepConfig(dt=dt, sample_every=sample_every, store_gauge=store_gauge)
    return lat, simulate_dm(init, cfg.T, step_cfg), dt


def modulated_limit_spinor(v_plus: np.ndarray, v_minus: np.ndarray, t: float, eps: float) -> np.ndarray:
    """exp(-it/eps^2) (v+, 0) + exp(+it/eps^2) (0, v-)."""
    return np.exp(-1j * t / eps**2) * sp.embed_upper(v_plus) + np.exp(
        1j * t / eps**2
    ) * sp.embed_lower(v_minus)


def nonrel_convergence_study(cfg: ExperimentConfig) -> RateReport:
    """Errors of the coupled run against the limit system, per eps:
    sup_t of the H1 spinor error, the Hdot1 potential error and the L^p
    (p = 1, 2, 3) charge errors; rates fitted over the eps list."""
    t_start = _time.time()
    lat = cfg.lattice()
    v0p, v0m = df.limit_data(lat, cfg.family, cfg.params)
    norms = ["h1_spinor", "h1dot_A0", "lp1_charge", "lp2_charge", "lp3_charge"]
    errors = {k: [] for k in norms}
    for eps in cfg.eps_list:
        _, traj, dt = _dm_run(cfg, eps)
        sp_traj = simulate_sp(
            SPState(lat, 0.0, v0p.copy(), v0m.copy()),
            cfg.T,
            cfg.dt_ref,
            sample_every=1,
        )
        sp_times = np.asarray(sp_traj.times)
        errs = {k: 0.0 for k in norms}
        for t, psi in zip(traj.times, traj.psis):
            i = int(np.argmin(np.abs(sp_times - t)))
            if abs(sp_times[i] - t) > 1e-6 * cfg.dt_ref:
                raise RuntimeError("sample alignment failure between DM and SP runs")
            vp, vm = sp_traj.v_plus[i], sp_traj.v_minus[i]
            ref = modulated_limit_spinor(vp, vm, t, eps)
            errs["h1_spinor"] = max(errs["h1_spinor"], sobolev_norm(lat, psi - ref, 1.0))
            rho = sp.charge_density(psi)
            n_lim = sp.charge_density(vp) + sp.charge_density(vm)
            A0 = derived_A0(lat, psi)
            from .fourier import poisson_solve

            u = poisson_solve(lat, n_lim)
            errs["h1dot_A0"] = max(
                errs["h1dot_A0"], sobolev_norm(lat, A0 - u, 1.0, homogeneous=True)
            )
            for p in (1, 2, 3):
                errs[f"lp{p}_charge"] = max(
                    errs[f"lp{p}_charge"], lp_norm(lat, rho - n_lim, float(p))
                )
        for k in norms:
            errs_k = errs[k]
            errors[k].append(errs_k)
    rates, resids = {}, {}
    for k in norms:
        rates[k], resids[k] = fit_rate(cfg.eps_list, errors[k])
    report = RateReport(list(cfg.eps_list), errors, rates, resids)
    report.rates["h1_spinor_rate"] = rates["h1_spinor"]
    report.meta = {
        "study": "nonrel_convergence",
        "family": cfg.family,
        "n": cfg.n,
        "T": cfg.T,
        "dt_schedule": cfg.dt_schedule,
        "wall_seconds": round(_time.time() - t_start, 3),
    }
    return report


# -- semi-nonrelativistic (Pauli) study ----------------------------------------------


def seminonrel_study(cfg: ExperimentConfig) -> RateReport:
    """Pauli comparison per eps: sup_t H1 of chi^eps - chi_P (expected
    O(eps^2)) and sup_t L1 of the current defect J - J_P - spin curl
    (expected O(eps)), with the Pauli spinor driven by the DM gauge fields."""
    t_start = _time.time()
    norms = ["h1_pauli_spinor", "l1_current_defect"]
    errors = {k: [] for k in norms}
    for eps in cfg.eps_list:
        lat, traj, dt = _dm_run(cfg, eps, store_gauge=True)
        gauge = GaugeSource.from_trajectory(traj)
        chi0 = sp.upper(traj.psis[0])  # modulation is the identity at t = 0
        sample_every = max(1, int(round(cfg.dt_ref * cfg.sample_every / dt)))
        pauli = simulate_pauli(PauliState(lat, 0.0, chi0.copy(), eps), gauge, cfg.T, dt,
                               sample_every=sample_every)
        p_times = np.asarray(pauli.times)
        e_spinor = 0.0
        e_current = 0.0
        for t, psi, A in zip(traj.times, traj.psis, traj.As):
            i = int(np.argmin(np.abs(p_times - t)))
            if abs(p_times[i] - t) > 1e-9:
                raise RuntimeError("sample alignment failure between DM and Pauli runs")
            chi_P = pauli.chis[i]
            chi = sp.upper(np.exp(1j * t / eps**2) * psi)
            e_spinor = max(e_spinor, sobolev_norm(lat, chi - chi_P, 1.0))
            J = sp.current_density(psi, eps)
            J_P = sp.pauli_current(lat, chi_P, A, eps)
            spin_curl = 0.5 * curl(lat, sp.spin_density(chi_P))
            e_current = max(e_current, lp_norm(lat, J - J_P - spin_curl, 1.0))
        errors["h1_pauli_spinor"].append(e_spinor)
        errors["l1_current_defect"].append(e_current)
    rates, resids = {}, {}
    for k in norms:
        rates[k], resids[k] = fit_rate(cfg.eps_list, errors[k])
    report = RateReport(list(cfg.eps_list), errors, rates, resids)
    report.meta = {
        "study": "seminonrel",
        "family": cfg.family,
        "n": cfg.n,
        "T": cfg.T,
        "dt_schedule": cfg.dt_schedule,
        "wall_seconds": round(_time.time() - t_start, 3),
    }
    return report


# -- weak-* current pairing ------------------------------------------------------------


def test_bump(lat: Lattice, T: float, t_support=(0.2, 0.8)):
    """Fixed smooth bump G(t, x) = g(t) b(x), compactly supported in time
    inside (0, T) and smooth on the torus; returns callables."""
    t0, t1 = t_support[0] * T, t_support[1] * T

    def g(t):
        s = (np.asarray(t, dtype=float) - t0) / (t1 - t0)
        inside = (s > 0) & (s < 1)
        out = np.zeros_like(s, dtype=float)
        with np.errstate(over="ignore"):
            out[inside] = np.exp(-1.0 / np.maximum(s[inside] * (1.0 - s[inside]), 1e-300))
        return out * np.exp(4.0)  # normalized to 1 at the midpoint

    X1, X2, X3 = lat.grid()
    b = (1.0 + np.cos(X1)) * (1.0 + 0.5 * np.sin(X2)) * (1.0 + 0.5 * np.cos(X3)) / 4.0
    b = b + np.zeros((lat.n, lat.n, lat.n))
    return g, b


def current_weak_pairing(lat: Lattice, times, currents, g_of_t, b_of_x) -> np.ndarray:
    """Trapezoid-in-time, grid-in-space quadrature of integral J_k G dt dx."""
    times = np.asarray(times, dtype=float)
    weights = g_of_t(times)
    vals = np.array(
        [[float(np.sum(J[k] * b_of_x)) * lat.cell_volume for k in range(3)] for J in currents]
    )
    return np.array(
        [float(np.trapezoid(weights * vals[:, k], times)) for k in range(3)]
    )


def weak_pairing_study(cfg: ExperimentConfig) -> dict:
    """Pairing <J^eps, G> against <J^0, G> along the eps list."""
    lat = cfg.lattice()
    v0p, v0m = df.limit_data(lat, cfg.family, cfg.params)
    g, b = test_bump(lat, cfg.T)
    sp_traj = simulate_sp(SPState(lat, 0.0, v0p.copy(), v0m.copy()), cfg.T, cfg.dt_ref, sample_every=1)
    J0 = [sp.limit_current(lat, vp, vm) for vp, vm in zip(sp_traj.v_plus, sp_traj.v_minus)]
    pairing_limit = current_weak_pairing(lat, sp_traj.times, J0, g, b)
    defects = []
    for eps in cfg.eps_list:
        _, traj, _ = _dm_run(cfg, eps)
        J_eps = [sp.current_density(p, eps) for p in traj.psis]
        pairing = current_weak_pairing(lat, traj.times, J_eps, g, b)
        defects.append(float(np.linalg.norm(pairing - pairing_limit)))
    return {
        "eps_list": list(cfg.eps_list),
        "defects": defects,
        "pairing_limit": [float(x) for x in pairing_limit],
        "strictly_decreasing": all(b < a for a, b in zip(defects, defects[1:])),
    }


# -- dyadic probes ------------------------------------------------------------------


def lp_localized_data(lat: Lattice, scale: float, seed_key: tuple) -> np.ndarray:
    """Random complex scalar field localized at dyadic scale by the LP bump."""
    rng = np.random.default_rng(np.random.SeedSequence(seed_key))
    w = rng.standard_normal((lat.n, lat.n, lat.n)) + 1j * rng.standard_normal(
        (lat.n, lat.n, lat.n)
    )
    return littlewood_paley(lat, w, scale)


def dyadic_probe(lat: Lattice, mu: float, lam: float, eps: float, trials: int,
                 case: str, T: float = 1.0, dt: float = 0.02, seed: int = 0,
                 sign: int = 1) -> list:
    """Ratio statistics for the spacetime product estimates.

    u solves box_eps u = 0 with data (f, 0); v solves the modulated-Dirac
    scalar flow i dt v = sign * h_eps v with data g.  Case 'i'/'ii' measures
    ||LP_mu(u_lam v_lam)||_{L2_{t,x}}, case 'iii' measures ||u_mu v_lam||
    without outer localization; denominators follow the respective claims.
    """
    if case not in ("i", "ii", "iii"):
        raise ValueError(f"case must be 'i', 'ii' or 'iii', got {case}")
    if max(mu, lam) > float(np.max(lat.k_abs)) / 2.0:
        raise ValueError("dyadic scale beyond lattice resolution")
    from .fourier import h_eps_symbol

    steps = int(round(T / dt))
    times = np.arange(steps + 1) * dt
    omega = lat.k_abs / eps
    h_sym = h_eps_symbol(lat, eps)
    r_mu = lat.k_abs / mu
    beta_mu = bump_profile(r_mu) - bump_profile(2.0 * r_mu)
    ratios = []
    for trial in range(trials):
        f_scale = mu if case == "iii" else lam
        fhat = lat.fft(lp_localized_data(lat, f_scale, (seed, 11, trial)))
        ghat = lat.fft(lp_localized_data(lat, lam, (seed, 23, trial)))
        norm_f = np.sqrt(np.sum(np.abs(fhat) ** 2)) * np.sqrt(lat.volume) / lat.n**3
        norm_g = np.sqrt(np.sum(np.abs(ghat) ** 2)) * np.sqrt(lat.volume) / lat.n**3
        if norm_f == 0.0 or norm_g == 0.0:
            ratios.append(0.0)
            continue
        sq_accum = np.zeros(steps + 1)
        for it, t in enumerate(times):
            u = lat.ifft(np.cos(omega * t) * fhat)
            v = lat.ifft(np.exp(-1j * sign * h_sym * t) * ghat)
            prod_hat = lat.fft(u * v)
            if case in ("i", "ii"):
                prod_hat = beta_mu * prod_hat
            sq_accum[it] = np.sum(np.abs(prod_hat) ** 2) * lat.volume / lat.n**6
        sq_spacetime = float(np.trapezoid(sq_accum, times))
        numerator = np.sqrt(sq_spacetime)
        if case == "i":
            denom = np.sqrt(eps) * mu * norm_f * norm_g
        elif case == "ii":
            denom = np.sqrt(eps) * np.sqrt(mu) * np.sqrt(lam) * norm_f * norm_g
        else:
            denom = np.sqrt(eps) * min(mu, lam) * norm_f * norm_g
        ratios.append(numerator / denom if denom > 0 else 0.0)
    return ratios


def dyadic_sweep(case: str, n: int, period: float, eps: float, mu_list, lam_list,
                 trials: int = 8, seed: int = 0, T: float = 1.0, dt: float = 0.02) -> list:
    """Run a (mu, lambda) sweep; returns rows (mu, lambda, eps, trial, ratio)."""
    lat = make_lattice(n, period)
    rows = []
    for mu in mu_list:
        for lam in lam_list:
            if case in ("i", "ii") and mu > lam:
                continue
            ratios = dyadic_probe(lat, mu, lam, eps, trials, case, T=T, dt=dt, seed=seed)
            for trial, r in enumerate(ratios):
                rows.append((float(mu), float(lam), float(eps), trial, float(r)))
    return rows
