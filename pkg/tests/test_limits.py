import numpy as np
import pytest

from diracmaxwell import evolve_dm as dm
from diracmaxwell import evolve_limits as lim
from diracmaxwell import fourier as fc
from diracmaxwell import spinors as sp
from diracmaxwell.data_families import gauge_profile, v_minus_profile, v_plus_profile

TWO_PI = 2 * np.pi


@pytest.fixture(scope="module")
def lat():
    return fc.make_lattice(12, TWO_PI)


def plane_wave(lat, kvec):
    X1, X2, X3 = lat.grid()
    return np.exp(1j * (kvec[0] * X1 + kvec[1] * X2 + kvec[2] * X3)) + np.zeros((lat.n,) * 3)


def random_two_spinor(lat, seed):
    rng = np.random.default_rng(seed)
    shape = (2, lat.n, lat.n, lat.n)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestSPStep:
    def test_plus_branch_kinetic_phase(self, lat):
        v = np.zeros((2, lat.n, lat.n, lat.n), dtype=complex)
        v[0] = plane_wave(lat, (1, 0, 0))
        state = lim.SPState(lat, 0.0, v, np.zeros_like(v))
        out = lim.sp_step(state, 0.02)
        assert np.abs(out.v_plus - np.exp(-1j * 0.01) * v).max() < 1e-13

    def test_minus_branch_opposite_phase(self, lat):
        v = np.zeros((2, lat.n, lat.n, lat.n), dtype=complex)
        v[1] = plane_wave(lat, (1, 0, 0))
        state = lim.SPState(lat, 0.0, np.zeros_like(v), v)
        out = lim.sp_step(state, 0.02)
        assert np.abs(out.v_minus - np.exp(1j * 0.01) * v).max() < 1e-13

    def test_zero_stays_zero(self, lat):
        z = np.zeros((2, lat.n, lat.n, lat.n), dtype=complex)
        out = lim.sp_step(lim.SPState(lat, 0.0, z, z.copy()), 0.02)
        assert not out.v_plus.any() and not out.v_minus.any()

    def test_mass_per_component_conserved(self, lat):
        vp = random_two_spinor(lat, 0)
        vm = random_two_spinor(lat, 1)
        state = lim.SPState(lat, 0.0, vp, vm)
        m_p, m_m = fc.l2_norm(lat, vp), fc.l2_norm(lat, vm)
        out = lim.sp_step(state, 0.02)
        assert fc.l2_norm(lat, out.v_plus) == pytest.approx(m_p, rel=1e-13)
        assert fc.l2_norm(lat, out.v_minus) == pytest.approx(m_m, rel=1e-13)

    def test_constant_data_is_stationary(self, lat):
        v = np.zeros((2, lat.n, lat.n, lat.n), dtype=complex)
        v[0] = 0.8
        traj = lim.simulate_sp(lim.SPState(lat, 0.0, v, np.zeros_like(v)), 0.2, 0.02)
        assert np.abs(traj.v_plus[-1] - v).max() < 1e-12


class TestSimulateSP:
    def test_plane_wave_exact_for_all_time(self, lat):
        v = np.zeros((2, lat.n, lat.n, lat.n), dtype=complex)
        v[0] = plane_wave(lat, (1, 0, 0))
        traj = lim.simulate_sp(lim.SPState(lat, 0.0, v, np.zeros_like(v)), 1.0, 0.01, sample_every=100)
        assert np.abs(traj.v_plus[-1] - np.exp(-1j * 0.5) * v).max() < 1e-11

    def test_self_convergence_order_two(self, lat):
        vp = v_plus_profile(lat, 0.7)
        vm = v_minus_profile(lat, 0.4)

        def run(dt):
            st = lim.SPState(lat, 0.0, vp.copy(), vm.copy())
            return lim.simulate_sp(st, 0.5, dt, sample_every=int(round(0.5 / dt)))

        e1 = fc.sobolev_norm(lat, run(0.02).v_plus[-1] - run(0.01).v_plus[-1], 1.0)
        e2 = fc.sobolev_norm(lat, run(0.01).v_plus[-1] - run(0.005).v_plus[-1], 1.0)
        assert e1 / e2 == pytest.approx(4.0, rel=0.3)

    def test_mass_conservation_over_unit_time(self, lat):
        vp = v_plus_profile(lat, 0.7)
        vm = v_minus_profile(lat, 0.4)
        traj = lim.simulate_sp(lim.SPState(lat, 0.0, vp, vm), 1.0, 0.01, sample_every=10)
        for col in ("mass_plus", "mass_minus"):
            drift = np.abs(traj.diagnostics[col] - traj.diagnostics[col][0]).max()
            assert drift < 1e-8


class TestPauliStep:
    def test_reduces_to_schrodinger(self, lat):
        # eps = 0 and A = 0: identical to the + branch potential/kinetic split
        chi = random_two_spinor(lat, 2)
        X1, _, _ = lat.grid()
        A0 = np.cos(X1) + np.zeros((lat.n,) * 3)
        out = lim.pauli_step(lim.PauliState(lat, 0.0, chi.copy(), 0.0), A0, np.zeros((3, lat.n, lat.n, lat.n)), 0.02)
        half = np.exp(1j * A0 * 0.01)
        ref = half * chi
        ref = lat.ifft(np.exp(-1j * lat.k_sq * 0.01) * lat.fft(ref))
        ref = half * ref
        assert np.abs(out.chi - ref).max() < 1e-12

    def test_zeeman_phase_constant_B(self, lat):
        eps, dt, b = 0.5, 0.02, 0.7
        chi = np.zeros((2, lat.n, lat.n, lat.n), dtype=complex)
        chi[0] = 1.0
        B = np.zeros((3, lat.n, lat.n, lat.n))
        B[2] = b
        out = lim.pauli_step(
            lim.PauliState(lat, 0.0, chi, eps), np.zeros((lat.n,) * 3), np.zeros((3, lat.n, lat.n, lat.n)), dt, B=B
        )
        assert np.abs(out.chi[0] - np.exp(1j * eps * b * dt / 2.0)).max() < 1e-13

    def test_identity_for_zero_everything(self, lat):
        chi = random_two_spinor(lat, 3)
        out = lim.pauli_step(
            lim.PauliState(lat, 0.0, chi.copy(), 0.4),
            np.zeros((lat.n,) * 3),
            np.zeros((3, lat.n, lat.n, lat.n)),
            0.02,
        )
        ref = lat.ifft(np.exp(-1j * lat.k_sq * 0.01) * lat.fft(chi))
        assert np.abs(out.chi - ref).max() < 1e-13

    def test_unitary_with_full_fields(self, lat):
        chi = random_two_spinor(lat, 4)
        A = gauge_profile(lat, 0.3)
        X1, _, _ = lat.grid()
        A0 = np.cos(X1) + np.zeros((lat.n,) * 3)
        m0 = fc.l2_norm(lat, chi)
        out = lim.pauli_step(lim.PauliState(lat, 0.0, chi, 0.4), A0, A, 0.02)
        assert abs(fc.l2_norm(lat, out.chi) - m0) < 1e-10 * m0

    def test_rejects_nondivergence_free_A(self, lat):
        chi = random_two_spinor(lat, 5)
        X1, _, _ = lat.grid()
        A = np.zeros((3, lat.n, lat.n, lat.n))
        A[0] = np.sin(X1) + np.zeros((lat.n,) * 3)  # div A = cos x1 != 0
        with pytest.raises(ValueError):
            lim.pauli_step(lim.PauliState(lat, 0.0, chi, 0.4), np.zeros((lat.n,) * 3), A, 0.02)


class TestSimulatePauli:
    def _gauge_from_dm(self, lat, eps, T, dt, family_amp=0.5, gauge_amp=0.2):
        psi0 = sp.pi_eps(lat, sp.embed_upper(v_plus_profile(lat, family_amp)), eps, +1)
        a0 = gauge_profile(lat, gauge_amp) if gauge_amp else np.zeros((3, lat.n, lat.n, lat.n))
        init = dm.DMState(lat, 0.0, psi0, a0, np.zeros((3, lat.n, lat.n, lat.n)), eps)
        traj = dm.simulate_dm(init, T, dm.StepConfig(dt=dt, sample_every=max(1, int(round(T / dt)) // 4), store_gauge=True))
        return traj

    def test_zero_potentials_free_schrodinger(self, lat):
        # DM run with zero data: gauge fields identically zero
        n = lat.n
        init = dm.DMState(
            lat, 0.0, np.zeros((4, n, n, n), dtype=complex), np.zeros((3, n, n, n)), np.zeros((3, n, n, n)), 0.5
        )
        traj = dm.simulate_dm(init, 0.1, dm.StepConfig(dt=0.01, store_gauge=True))
        gauge = lim.GaugeSource.from_trajectory(traj)
        chi0 = np.zeros((2, n, n, n), dtype=complex)
        chi0[0] = plane_wave(lat, (1, 0, 0))
        out = lim.simulate_pauli(lim.PauliState(lat, 0.0, chi0, 0.5), gauge, 0.1, 0.01)
        assert np.abs(out.chis[-1] - np.exp(-1j * 0.05) * chi0).max() < 1e-11

    def test_stationary_dm_gives_free_kinetic_phases(self, lat):
        n = lat.n
        psi0 = np.zeros((4, n, n, n), dtype=complex)
        psi0[0] = 1.0
        init = dm.DMState(lat, 0.0, psi0, np.zeros((3, n, n, n)), np.zeros((3, n, n, n)), 0.5)
        traj = dm.simulate_dm(init, 0.1, dm.StepConfig(dt=0.01, store_gauge=True))
        gauge = lim.GaugeSource.from_trajectory(traj)
        chi0 = np.zeros((2, n, n, n), dtype=complex)
        chi0[1] = plane_wave(lat, (0, 2, 0))
        out = lim.simulate_pauli(lim.PauliState(lat, 0.0, chi0, 0.5), gauge, 0.1, 0.01)
        assert np.abs(out.chis[-1] - np.exp(-2j * 0.1) * chi0).max() < 1e-11

    def test_self_convergence_order_two(self, lat):
        eps, T = 0.4, 0.1
        traj = self._gauge_from_dm(lat, eps, T, 1.25e-3)
        gauge = lim.GaugeSource.from_trajectory(traj)
        chi0 = sp.upper(traj.psis[0])

        def run(dt):
            st = lim.PauliState(lat, 0.0, chi0.copy(), eps)
            return lim.simulate_pauli(st, gauge, T, dt, sample_every=int(round(T / dt)))

        e1 = fc.sobolev_norm(lat, run(0.01).chis[-1] - run(0.005).chis[-1], 1.0)
        e2 = fc.sobolev_norm(lat, run(0.005).chis[-1] - run(0.0025).chis[-1], 1.0)
        assert e1 / e2 == pytest.approx(4.0, rel=0.35)

    def test_mass_conserved(self, lat):
        eps, T = 0.4, 0.1
        traj = self._gauge_from_dm(lat, eps, T, 2e-3)
        gauge = lim.GaugeSource.from_trajectory(traj)
        chi0 = sp.upper(traj.psis[0])
        out = lim.simulate_pauli(lim.PauliState(lat, 0.0, chi0, eps), gauge, T, 2e-3, sample_every=10)
        drift = np.abs(out.diagnostics["mass"] - out.diagnostics["mass"][0]).max()
        assert drift < 1e-8

    def test_sparse_gauge_record_rejected(self, lat):
        eps, T = 0.4, 0.1
        traj = self._gauge_from_dm(lat, eps, T, 0.02)
        gauge = lim.GaugeSource.from_trajectory(traj)
        chi0 = sp.upper(traj.psis[0])
        with pytest.raises(ValueError):
            lim.simulate_pauli(lim.PauliState(lat, 0.0, chi0, eps), gauge, T, 0.01)
