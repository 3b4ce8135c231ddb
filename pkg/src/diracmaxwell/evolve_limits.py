"""Solvers for the limiting Schrodinger-Poisson system and the Pauli
equation, sharing the lattice substrate and the jellium Poisson convention
with the Dirac-Maxwell evolver.

The Schrodinger-Poisson pair carries the electron branch (+Delta/2) and the
negative-mass positron branch (-Delta/2) coupled through one Coulomb
potential.  The Pauli spinor is driven by externally supplied gauge fields,
typically read off a Dirac-Maxwell run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import spinors as sp
from .fourier import Lattice, curl, divergence, l2_norm, poisson_solve, sobolev_norm


@dataclass
class SPState:
    lat: Lattice
    t: float
    v_plus: np.ndarray     # (2, n, n, n) complex
    v_minus: np.ndarray

    def copy(self):
        return SPState(self.lat, self.t, self.v_plus.copy(), self.v_minus.copy())


def sp_potential(lat: Lattice, v_plus: np.ndarray, v_minus: np.ndarray) -> np.ndarray:
    """u with Delta u = |v+|^2 + |v-|^2 - mean (jellium)."""
    n = sp.charge_density(v_plus) + sp.charge_density(v_minus)
    return poisson_solve(lat, n)


def sp_step(state: SPState, dt: float) -> SPState:
    """Strang step: half potential phase, exact kinetic phases, half phase.

    The common local phase exp(i u dt/2) leaves both densities invariant, so
    u is recomputed only after the kinetic sweep.
    """
    lat = state.lat
    u = sp_potential(lat, state.v_plus, state.v_minus)
    half = np.exp(1j * u * dt / 2.0)
    vp = half * state.v_plus
    vm = half * state.v_minus
    kin = np.exp(-1j * lat.k_sq * dt / 2.0)
    vp = lat.ifft(kin * lat.fft(vp))
    vm = lat.ifft(np.conj(kin) * lat.fft(vm))
    u = sp_potential(lat, vp, vm)
    half = np.exp(1j * u * dt / 2.0)
    return SPState(lat, state.t + dt, half * vp, half * vm)


@dataclass
class SPTrajectory:
    lat: Lattice
    times: list = field(default_factory=list)
    v_plus: list = field(default_factory=list)
    v_minus: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


def simulate_sp(init: SPState, T: float, dt: float, sample_every: int = 1) -> SPTrajectory:
    from .evolve_dm import n_steps_for

    steps = n_steps_for(T, dt)
    lat = init.lat
    traj = SPTrajectory(lat)
    rows = []

    def sample(s):
        traj.times.append(s.t)
        traj.v_plus.append(s.v_plus.copy())
        traj.v_minus.append(s.v_minus.copy())
        rows.append(
            {
                "t": s.t,
                "mass_plus": l2_norm(lat, s.v_plus) ** 2,
                "mass_minus": l2_norm(lat, s.v_minus) ** 2,
                "h1_plus": sobolev_norm(lat, s.v_plus, 1.0),
                "h1_minus": sobolev_norm(lat, s.v_minus, 1.0),
            }
        )

    state = init.copy()
    sample(state)
    for k in range(steps):
        state = sp_step(state, dt)
        if not np.all(np.isfinite(state.v_plus)):
            raise FloatingPointError(f"non-finite SP state at step {k + 1}")
        if (k + 1) % sample_every == 0 or k + 1 == steps:
            sample(state)
    traj.diagnostics = {c: np.array([r[c] for r in rows]) for c in rows[0]}
    return traj


# -- Pauli ----------------------------------------------------------------------


@dataclass
class PauliState:
    lat: Lattice
    t: float
    chi: np.ndarray        # (2, n, n, n) complex
    eps: float

    def copy(self):
        return PauliState(self.lat, self.t, self.chi.copy(), self.eps)


def _kick_matrix_apply(A0, B, A_sq, eps, dt, chi):
    """exp(-i dt V) chi with V = -A0 - (eps/2) B.sigma + (eps^2/2) A^2.

    V = a I + b.sigma pointwise; the exponential is cos - i sin * unit part.
    """
    a = -A0 + 0.5 * eps**2 * A_sq
    b = -0.5 * eps * B
    mag = np.sqrt(np.sum(b**2, axis=0))
    theta = dt * mag
    sin_over = dt * np.sinc(theta / np.pi)
    b_sigma_chi = (
        b[0] * sp.mat(sp.SIGMA[0], chi)
        + b[1] * sp.mat(sp.SIGMA[1], chi)
        + b[2] * sp.mat(sp.SIGMA[2], chi)
    )
    return np.exp(-1j * dt * a) * (np.cos(theta) * chi - 1j * sin_over * b_sigma_chi)


def _advect_apply(lat: Lattice, A: np.ndarray, eps: float, dt: float, chi: np.ndarray,
                  tol: float = 1e-16, max_terms: int = 24) -> np.ndarray:
    """exp(-i dt M) chi for the mixed term M = i eps A.grad (Hermitian for
    divergence-free A), via the Taylor series of the anti-Hermitian generator.

    Converges to roundoff in a handful of terms since dt*|M| << 1 at the
    resolutions used here; unitarity error is at the truncation level.
    """
    from .fourier import gradient

    term = chi
    out = chi.copy()
    scale = float(np.max(np.abs(chi))) + 1e-300
    for k in range(1, max_terms + 1):
        grad = np.stack([gradient(lat, term[a]) for a in range(2)])  # (2,3,n,n,n)
        m_term = 1j * eps * np.sum(A[None] * grad, axis=1)
        term = (-1j * dt / k) * m_term
        out = out + term
        if float(np.max(np.abs(term))) < tol * scale:
            return out
    raise FloatingPointError("mixed-term exponential did not converge; reduce dt")


def pauli_step(state: PauliState, A0: np.ndarray, A: np.ndarray, dt: float,
               B: np.ndarray | None = None, div_tol: float = 1e-8) -> PauliState:
    """Strang step of the Pauli equation in the supplied (midpoint) fields."""
    lat, eps = state.lat, state.eps
    if eps > 0 and np.any(A):
        div_max = float(np.max(np.abs(divergence(lat, A))))
        if div_max > div_tol:
            raise ValueError(f"A is not divergence-free (max |div A| = {div_max:.2e})")
    if B is None:
        B = curl(lat, A)
    A_sq = np.sum(A**2, axis=0)
    chi = _kick_matrix_apply(A0, B, A_sq, eps, dt / 2.0, state.chi)
    if eps > 0 and np.any(A):
        chi = _advect_apply(lat, A, eps, dt / 2.0, chi)
    kin = np.exp(-1j * lat.k_sq * dt / 2.0)
    chi = lat.ifft(kin * lat.fft(chi))
    if eps > 0 and np.any(A):
        chi = _advect_apply(lat, A, eps, dt / 2.0, chi)
    chi = _kick_matrix_apply(A0, B, A_sq, eps, dt / 2.0, chi)
    return PauliState(lat, state.t + dt, chi, eps)


@dataclass
class PauliTrajectory:
    lat: Lattice
    times: list = field(default_factory=list)
    chis: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


class GaugeSource:
    """Per-step gauge fields (t_i, A0_i, A_i) read from a DM trajectory;
    provides midpoint values by linear interpolation."""

    def __init__(self, times, A0_list, A_list):
        self.times = np.asarray(times, dtype=float)
        if len(self.times) < 2:
            raise ValueError("gauge source needs at least two samples")
        self.A0_list = A0_list
        self.A_list = A_list
        self.spacing = float(np.max(np.diff(self.times)))

    @classmethod
    def from_trajectory(cls, traj):
        if not traj.gauge_times:
            raise ValueError("DM trajectory was run without store_gauge")
        return cls(traj.gauge_times, traj.gauge_A0, traj.gauge_A)

    def at(self, t: float):
        ts = self.times
        if t < ts[0] - 1e-12 or t > ts[-1] + 1e-12:
            raise ValueError(f"time {t} outside gauge record [{ts[0]}, {ts[-1]}]")
        i = int(np.clip(np.searchsorted(ts, t) - 1, 0, len(ts) - 2))
        w = (t - ts[i]) / (ts[i + 1] - ts[i])
        A0 = (1.0 - w) * self.A0_list[i] + w * self.A0_list[i + 1]
        A = (1.0 - w) * self.A_list[i] + w * self.A_list[i + 1]
        return A0, A


def simulate_pauli(init: PauliState, gauge: GaugeSource, T: float, dt: float,
                   sample_every: int = 1) -> PauliTrajectory:
    """Evolve the Pauli spinor in the time-dependent fields of a DM run."""
    from .evolve_dm import n_steps_for

    steps = n_steps_for(T, dt)
    if gauge.spacing > dt * (1.0 + 1e-9):
        raise ValueError(
            f"gauge record spacing {gauge.spacing} is sparser than dt = {dt}"
        )
    lat = init.lat
    traj = PauliTrajectory(lat)
    rows = []

    def sample(s):
        traj.times.append(s.t)
        traj.chis.append(s.chi.copy())
        rows.append({"t": s.t, "mass": l2_norm(lat, s.chi) ** 2, "h1": sobolev_norm(lat, s.chi, 1.0)})

    state = init.copy()
    sample(state)
    for k in range(steps):
        A0_mid, A_mid = gauge.at(state.t + dt / 2.0)
        state = pauli_step(state, A0_mid, A_mid, dt)
        if (k + 1) % sample_every == 0 or k + 1 == steps:
            sample(state)
    traj.diagnostics = {c: np.array([r[c] for r in rows]) for c in rows[0]}
    return traj
