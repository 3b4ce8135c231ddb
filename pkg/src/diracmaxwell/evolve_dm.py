"""Time integration of the scaled Dirac-Maxwell-Coulomb system.

The stiff rest-energy/transport part is integrated exactly per Fourier mode
through the energy projections, the magnetic wave equation by an exact
per-mode oscillator with the current frozen over the step, and the bounded
potential terms by pointwise-exact matrix exponentials.  Every spinor stage
is unitary, so the total charge is conserved to roundoff and the step size
is not constrained by eps.

Source freezing happens at the step midpoint (the current is evaluated after
the half kick and a half free flight), which makes a (dt, -dt) round trip
exact; see the tests.

A single run advances sequentially (steps are pure state-to-state maps);
distinct runs share no mutable state and the results are independent of
thread scheduling for a fixed configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import spinors as sp
from .fourier import Lattice, curl, divergence, gradient, l2_norm, lambda_eps, leray_project, poisson_solve, sobolev_norm


@dataclass
class DMState:
    """State of the coupled system: spinor, magnetic potential, eps*dt(A)."""

    lat: Lattice
    t: float
    psi: np.ndarray            # (4, n, n, n) complex
    A: np.ndarray              # (3, n, n, n) real, divergence-free
    eps_dtA: np.ndarray        # (3, n, n, n) real, stores eps * dt(A)
    eps: float

    def copy(self) -> "DMState":
        return DMState(self.lat, self.t, self.psi.copy(), self.A.copy(), self.eps_dtA.copy(), self.eps)


@dataclass
class StepConfig:
    dt: float
    dealias: bool = False
    sample_every: int = 1
    h1_ceiling: float = 1e6
    store_gauge: bool = False

    def __post_init__(self):
        if self.dt == 0:
            raise ValueError("dt must be nonzero")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")


def derived_A0(lat: Lattice, psi: np.ndarray, dealias_flag: bool = False) -> np.ndarray:
    """Electric potential from the instantaneous charge (jellium Poisson)."""
    rho = sp.charge_density(psi)
    if dealias_flag:
        from .fourier import dealias

        rho = dealias(lat, rho)
    return poisson_solve(lat, rho)


# -- elementary flows ----------------------------------------------------------


def free_dirac_step(lat: Lattice, psi: np.ndarray, dt: float, eps: float) -> np.ndarray:
    """Exact free flow: exp(-i dt lam/eps^2) Pi_+ + exp(+i dt lam/eps^2) Pi_-."""
    if not (eps > 0):
        raise ValueError(f"eps must be positive, got {eps}")
    psihat = lat.fft(psi)
    lam = np.sqrt(1.0 + eps**2 * lat.k_sq)
    qpsi = sp._q_hat_apply(lat, psihat, eps)
    plus = 0.5 * (psihat + qpsi / lam)
    minus = psihat - plus
    phase = np.exp(-1j * dt / eps**2 * lam)
    return lat.ifft(phase * plus + np.conj(phase) * minus)


def potential_kick(lat: Lattice, psi: np.ndarray, A0: np.ndarray, A: np.ndarray, dt: float, eps: float) -> np.ndarray:
    """Pointwise-exact solve of i dt(psi) = (-A.alpha - A0) psi over dt.

    exp(i dt (A.alpha + A0)) factorizes since A0*I commutes with A.alpha and
    (A.alpha)^2 = |A|^2; the magnetic factor is cos + i sin * unit-alpha.
    """
    mag = np.sqrt(np.sum(A**2, axis=0))
    theta = dt * mag
    sin_over_mag = dt * np.sinc(theta / np.pi)  # sin(dt m)/m with the m -> 0 limit dt
    alpha_psi = (
        A[0] * sp.mat(sp.ALPHA[0], psi)
        + A[1] * sp.mat(sp.ALPHA[1], psi)
        + A[2] * sp.mat(sp.ALPHA[2], psi)
    )
    return np.exp(1j * dt * A0) * (np.cos(theta) * psi + 1j * sin_over_mag * alpha_psi)


def wave_oscillator(lat: Lattice, fhat: np.ndarray, ghat: np.ndarray, srchat: np.ndarray, dt: float, eps: float):
    """Exact per-mode advance of eps^2 u'' + |k|^2 u = source (frozen).

    State is (u, w) with w = eps * dt(u); returns the advanced pair in
    Fourier space.  Modes with |k| = 0 get the exact polynomial drift.
    """
    omega = lat.k_abs / eps
    c = np.cos(omega * dt)
    s = np.sin(omega * dt)
    with np.errstate(invalid="ignore", divide="ignore"):
        s_over = np.where(lat.zero_modes, dt / eps, s / np.where(lat.zero_modes, 1.0, omega))
        part = np.where(lat.zero_modes, 0.0, srchat / np.where(lat.zero_modes, 1.0, eps**2 * omega**2))
    u_new = part + (fhat - part) * c + (ghat / eps) * s_over
    w_new = -eps * omega * (fhat - part) * s + ghat * c
    zm = lat.zero_modes
    if np.any(zm):
        # eps^2 u'' = source: quadratic drift in t
        u_new = np.where(zm, fhat + ghat / eps * dt + srchat / eps**2 * dt**2 / 2.0, u_new)
        w_new = np.where(zm, ghat + srchat / eps * dt, w_new)
    return u_new, w_new


def wave_step(lat: Lattice, A: np.ndarray, eps_dtA: np.ndarray, J: np.ndarray, dt: float, eps: float):
    """Exact step of eps^2 dtt(A) - Delta A = eps P J with J frozen."""
    Ahat = lat.fft(A)
    What = lat.fft(eps_dtA)
    Shat = eps * lat.fft(J)
    A_new, W_new = wave_oscillator(lat, Ahat, What, Shat, dt, eps)
    return lat.ifft(A_new).real, lat.ifft(W_new).real


# -- coupled stepping ----------------------------------------------------------


def dm_strang_step(state: DMState, cfg: StepConfig) -> DMState:
    lat, eps, dt = state.lat, state.eps, cfg.dt
    A0 = derived_A0(lat, state.psi, cfg.dealias)
    psi_a = potential_kick(lat, state.psi, A0, state.A, dt / 2.0, eps)
    psi_mid = free_dirac_step(lat, psi_a, dt / 2.0, eps)
    J = sp.current_density(psi_mid, eps)
    if cfg.dealias:
        from .fourier import dealias

        J = dealias(lat, J)
    J = leray_project(lat, J)
    psi_b = free_dirac_step(lat, psi_mid, dt / 2.0, eps)
    A_new, W_new = wave_step(lat, state.A, state.eps_dtA, J, dt, eps)
    A0_new = derived_A0(lat, psi_b, cfg.dealias)
    psi_new = potential_kick(lat, psi_b, A0_new, A_new, dt / 2.0, eps)
    if not np.all(np.isfinite(psi_new)):
        raise FloatingPointError(f"non-finite spinor after step at t = {state.t}")
    return DMState(lat, state.t + dt, psi_new, A_new, W_new, eps)


@dataclass
class Trajectory:
    """Sampled states plus per-sample diagnostics of a single run."""

    lat: Lattice
    eps: float
    times: list = field(default_factory=list)
    psis: list = field(default_factory=list)
    As: list = field(default_factory=list)
    Ws: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    # optional dense gauge record (every step) for driving the Pauli solver
    gauge_times: list = field(default_factory=list)
    gauge_A0: list = field(default_factory=list)
    gauge_A: list = field(default_factory=list)

    def record(self, state: DMState):
        self.times.append(state.t)
        self.psis.append(state.psi.copy())
        self.As.append(state.A.copy())
        self.Ws.append(state.eps_dtA.copy())

    def record_gauge(self, state: DMState):
        self.gauge_times.append(state.t)
        self.gauge_A0.append(derived_A0(self.lat, state.psi))
        self.gauge_A.append(state.A.copy())


DIAGNOSTIC_COLUMNS = ("t", "charge", "h1_psi", "h1dot_A", "eps_l2_dtA", "h1_pi_minus_psi")


def _diagnose(state: DMState) -> dict:
    lat = state.lat
    return {
        "t": state.t,
        "charge": sp.total_charge(lat, state.psi),
        "h1_psi": sobolev_norm(lat, state.psi, 1.0),
        "h1dot_A": sobolev_norm(lat, state.A, 1.0, homogeneous=True),
        "eps_l2_dtA": l2_norm(lat, state.eps_dtA),
        "h1_pi_minus_psi": sobolev_norm(lat, sp.pi_eps(lat, state.psi, state.eps, -1), 1.0),
    }


def n_steps_for(T: float, dt: float) -> int:
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T = {T} is not an integer multiple of dt = {dt}")
    return steps


def simulate_dm(init: DMState, T: float, cfg: StepConfig) -> Trajectory:
    """Advance to time T, sampling states and scalar diagnostics."""
    if not (T > 0):
        raise ValueError(f"T must be positive, got {T}")
    lat = init.lat
    init = init.copy()
    init.A = leray_project(lat, init.A)
    init.eps_dtA = leray_project(lat, init.eps_dtA)
    steps = n_steps_for(T, cfg.dt)
    traj = Trajectory(lat, init.eps)
    diag_rows = []
    state = init

    def sample(s):
        traj.record(s)
        diag_rows.append(_diagnose(s))

    sample(state)
    if cfg.store_gauge:
        traj.record_gauge(state)
    for k in range(steps):
        try:
            state = dm_strang_step(state, cfg)
        except FloatingPointError as exc:
            raise FloatingPointError(f"{exc} (step {k + 1})") from None
        if cfg.store_gauge:
            traj.record_gauge(state)
        if (k + 1) % cfg.sample_every == 0 or k + 1 == steps:
            sample(state)
            if diag_rows[-1]["h1_psi"] > cfg.h1_ceiling:
                raise FloatingPointError(
                    f"H1 blow-up guard tripped at t = {state.t} (step {k + 1})"
                )
    traj.diagnostics = {c: np.array([row[c] for row in diag_rows]) for c in DIAGNOSTIC_COLUMNS}
    return traj


# -- Picard reference integrator -----------------------------------------------


@dataclass
class PicardResult:
    times: np.ndarray
    psis: list                  # final iterate, sampled every step
    As: list
    cauchy: list                # sup_t H1 distance between consecutive iterates
    contraction_failed: bool


def _duhamel_dirac(lat: Lattice, psi0: np.ndarray, forcing: list, dt: float, eps: float) -> list:
    """Solve i dt(psi) = H0 psi + F(t) with exact free flow per step and the
    forcing frozen at the step midpoint (endpoint average)."""
    out = [psi0.copy()]
    psi = psi0
    for k in range(len(forcing) - 1):
        # exponential midpoint rule: the midpoint source rides the free flow
        f_mid = 0.5 * (forcing[k] + forcing[k + 1])
        psi = free_dirac_step(lat, psi, dt, eps) - 1j * dt * free_dirac_step(lat, f_mid, dt / 2.0, eps)
        out.append(psi.copy())
    return out


def picard_solve(init: DMState, T: float, m_max: int, cfg: StepConfig) -> PicardResult:
    """Iterate the linearized system starting from identically-zero iterates.

    Iterate m = -1 is zero everywhere, so iterate 0 is the free evolution of
    the data.  Each Dirac update applies Duhamel with the previous iterate's
    potentials, each wave update the exact oscillator with the previous
    iterate's (Leray-projected) current.
    """
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    lat, eps, dt = init.lat, init.eps, cfg.dt
    steps = n_steps_for(T, cfg.dt)
    times = np.arange(steps + 1) * dt
    zero_psi = np.zeros_like(init.psi)
    zero_A = np.zeros_like(init.A)
    a0 = leray_project(lat, init.A)
    a1 = leray_project(lat, init.eps_dtA)

    psi_prev = [zero_psi] * (steps + 1)
    A_prev = [zero_A] * (steps + 1)
    psi_prev2 = None
    cauchy = []
    for m in range(m_max + 1):
        # potentials of the previous iterate
        A0_prev = [derived_A0(lat, p, cfg.dealias) for p in psi_prev]
        forcing = []
        for p, a, a0_field in zip(psi_prev, A_prev, A0_prev):
            V = -(
                a[0] * sp.mat(sp.ALPHA[0], p)
                + a[1] * sp.mat(sp.ALPHA[1], p)
                + a[2] * sp.mat(sp.ALPHA[2], p)
            ) - a0_field * p
            forcing.append(V)
        psi_next = _duhamel_dirac(lat, init.psi, forcing, dt, eps)

        A_next = [a0.copy()]
        W = a1.copy()
        A_cur = a0.copy()
        for k in range(steps):
            J_mid = 0.5 * (
                sp.current_density(psi_prev[k], eps) + sp.current_density(psi_prev[k + 1], eps)
            )
            J_mid = leray_project(lat, J_mid)
            A_cur, W = wave_step(lat, A_cur, W, J_mid, dt, eps)
            A_next.append(A_cur.copy())

        diff = max(
            sobolev_norm(lat, pn - pp, 1.0) for pn, pp in zip(psi_next, psi_prev)
        )
        cauchy.append(diff)
        psi_prev2 = psi_prev
        psi_prev, A_prev = psi_next, A_next

    failed = False
    if len(cauchy) >= 4:
        increasing = [cauchy[i + 1] > cauchy[i] for i in range(len(cauchy) - 1)]
        failed = any(all(increasing[i : i + 3]) for i in range(len(increasing) - 2))
    return PicardResult(times, psi_prev, A_prev, cauchy, failed)


# -- diagnostic constructions ----------------------------------------------------


def compute_EB(lat: Lattice, A0: np.ndarray, A: np.ndarray, eps_dtA: np.ndarray):
    """E = grad(A0) - eps dt(A), B = curl(A)."""
    return gradient(lat, A0) - eps_dtA, curl(lat, A)


def free_dirac_trajectory(lat: Lattice, psi0: np.ndarray, times: np.ndarray, eps: float):
    """Free flow samples psi(t) and the exact dt(psi)(t) = -i Q psi / eps^2."""
    psis, dtpsis = [], []
    psihat0 = lat.fft(psi0)
    lam = np.sqrt(1.0 + eps**2 * lat.k_sq)
    q0 = sp._q_hat_apply(lat, psihat0, eps)
    plus0 = 0.5 * (psihat0 + q0 / lam)
    minus0 = psihat0 - plus0
    for t in times:
        phase = np.exp(-1j * t / eps**2 * lam)
        ph = phase * plus0 + np.conj(phase) * minus0
        psis.append(lat.ifft(ph))
        qh = sp._q_hat_apply(lat, ph, eps)
        dtpsis.append(lat.ifft(-1j / eps**2 * qh))
    return psis, dtpsis


def build_U(lat: Lattice, psi_series: list, dt: float, eps: float, dtpsi_series: list | None = None,
            variation_tol: float = 0.5):
    """Solve box_eps U = -i (eps dt + alpha.grad) psi with U(0) = 0 and
    i eps dt(U)(0) = psi(0), by the exact per-mode oscillator with the source
    frozen at each step midpoint.

    Returns (U_series, dtU_series).  When psi solves the free Dirac equation,
    i (eps dt - alpha.grad) U reproduces psi up to the O(dt^2) solver error.
    """
    if len(psi_series) < 2:
        raise ValueError("need at least two samples of psi")
    if dtpsi_series is None:
        dtpsi_series = []
        for k in range(len(psi_series)):
            if k == 0:
                d = (psi_series[1] - psi_series[0]) / dt
            elif k == len(psi_series) - 1:
                d = (psi_series[-1] - psi_series[-2]) / dt
            else:
                d = (psi_series[k + 1] - psi_series[k - 1]) / (2.0 * dt)
            dtpsi_series.append(d)

    def source_hat(k):
        psihat = lat.fft(psi_series[k])
        dpsihat = lat.fft(dtpsi_series[k])
        grad_part = 1j * (
            lat.kx * sp.mat(sp.ALPHA[0], psihat)
            + lat.ky * sp.mat(sp.ALPHA[1], psihat)
            + lat.kz * sp.mat(sp.ALPHA[2], psihat)
        )
        return -1j * (eps * dpsihat + grad_part)

    Uhat = np.zeros_like(lat.fft(psi_series[0]))
    What = eps * lat.fft(-1j / eps * psi_series[0])  # w = eps dt(U), i eps dt(U)(0) = psi0
    U_out = [lat.ifft(Uhat)]
    dtU_out = [lat.ifft(What) / eps]
    src_prev = source_hat(0)
    max_var = 0.0
    for k in range(len(psi_series) - 1):
        src_next = source_hat(k + 1)
        denom = np.max(np.abs(src_prev)) + 1e-300
        max_var = max(max_var, float(np.max(np.abs(src_next - src_prev)) / denom))
        s_mid = 0.5 * (src_prev + src_next)
        Uhat, What = wave_oscillator(lat, Uhat, What, s_mid, dt, eps)
        U_out.append(lat.ifft(Uhat))
        dtU_out.append(lat.ifft(What) / eps)
        src_prev = src_next
    if max_var > variation_tol:
        raise ValueError(
            f"source varies by {max_var:.2f} per step; refine the psi sampling"
        )
    return U_out, dtU_out


def reconstruct_from_U(lat: Lattice, U: np.ndarray, dtU: np.ndarray, eps: float) -> np.ndarray:
    """i (eps dt - alpha.grad) U; equals psi when U solves its wave equation."""
    Uhat = lat.fft(U)
    grad_part = 1j * (
        lat.kx * sp.mat(sp.ALPHA[0], Uhat)
        + lat.ky * sp.mat(sp.ALPHA[1], Uhat)
        + lat.kz * sp.mat(sp.ALPHA[2], Uhat)
    )
    return 1j * (eps * dtU - lat.ifft(grad_part))


def commutator_A0_lambda(lat: Lattice, A0: np.ndarray, g: np.ndarray, eps: float) -> np.ndarray:
    """[A0, lambda^eps] g = A0 * lambda(g) - lambda(A0 * g)."""
    return A0 * lambda_eps(lat, g, eps, 1) - lambda_eps(lat, A0 * g, eps, 1)


def remainder_R(state: DMState, psi_plus: np.ndarray, psi_minus: np.ndarray) -> np.ndarray:
    """The modified-system remainder: lambda R collects the eps-weighted field
    couplings and the [A0, lambda] commutator; R applies lambda^-1 to that."""
    lat, eps = state.lat, state.eps
    A0 = derived_A0(lat, state.psi)
    E, B = compute_EB(lat, A0, state.A, state.eps_dtA)
    grad_psi_dot_A = (
        state.A[0] * _dx(lat, state.psi, 0)
        + state.A[1] * _dx(lat, state.psi, 1)
        + state.A[2] * _dx(lat, state.psi, 2)
    )
    term = 2j * grad_psi_dot_A
    term += 1j * (E[0] * sp.mat(sp.ALPHA[0], state.psi) + E[1] * sp.mat(sp.ALPHA[1], state.psi) + E[2] * sp.mat(sp.ALPHA[2], state.psi))
    term -= B[0] * sp.mat(sp.SPIN[0], state.psi) + B[1] * sp.mat(sp.SPIN[1], state.psi) + B[2] * sp.mat(sp.SPIN[2], state.psi)
    lamR = eps * term
    lamR += eps**2 * np.sum(state.A**2, axis=0) * state.psi
    lamR -= commutator_A0_lambda(lat, A0, psi_plus - psi_minus, eps)
    return lambda_eps(lat, lamR, eps, -1)


def _dx(lat: Lattice, f: np.ndarray, axis: int) -> np.ndarray:
    k = (lat.kx, lat.ky, lat.kz)[axis]
    return lat.ifft(1j * k * lat.fft(f))
