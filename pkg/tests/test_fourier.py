import numpy as np
import pytest

from diracmaxwell import fourier as fc

TWO_PI = 2 * np.pi


@pytest.fixture(scope="module")
def lat():
    return fc.make_lattice(8, TWO_PI)


def plane_wave(lat, kvec):
    X1, X2, X3 = lat.grid()
    return np.exp(1j * (kvec[0] * X1 + kvec[1] * X2 + kvec[2] * X3)) + np.zeros((lat.n,) * 3)


def random_complex(lat, seed, shape=None):
    rng = np.random.default_rng(seed)
    shape = shape or (lat.n, lat.n, lat.n)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestLattice:
    def test_frequencies_small(self):
        lat = fc.make_lattice(4, TWO_PI)
        assert sorted(lat.axis_frequencies(raw=True)) == [-2.0, -1.0, 0.0, 1.0]

    def test_point_count_and_max_frequency(self):
        lat = fc.make_lattice(8, TWO_PI)
        assert lat.n**3 == 512
        assert np.max(np.abs(lat.axis_frequencies(raw=True))) == 4.0

    def test_frequency_spacing(self):
        lat = fc.make_lattice(8, 2 * TWO_PI)
        freqs = np.sort(lat.axis_frequencies(raw=True))
        assert np.allclose(np.diff(freqs), 0.5)

    @pytest.mark.parametrize("n", [3, 2, 7])
    def test_rejects_bad_n(self, n):
        with pytest.raises(ValueError):
            fc.make_lattice(n, TWO_PI)

    def test_rejects_bad_period(self):
        with pytest.raises(ValueError):
            fc.make_lattice(8, 0.0)

    def test_roundtrip(self, lat):
        f = random_complex(lat, 0)
        assert np.abs(lat.ifft(lat.fft(f)) - f).max() < 1e-12

    def test_real_field_conjugate_symmetry(self, lat):
        f = random_complex(lat, 1).real
        fhat = lat.fft(f)
        n = lat.n
        idx = (-np.arange(n)) % n
        mirrored = np.conj(fhat[np.ix_(idx, idx, idx)])
        assert np.abs(fhat - mirrored).max() < 1e-12 * np.abs(fhat).max()


class TestSymbols:
    def test_identity_symbol(self, lat):
        f = plane_wave(lat, (1, 0, 0))
        m = fc.Symbol("identity", lambda k1, k2, k3: np.ones_like(k1 + k2 + k3))
        assert np.abs(fc.apply_symbol(lat, f, m) - f).max() < 1e-13

    def test_laplacian_symbol_on_plane_wave(self, lat):
        f = plane_wave(lat, (1, 0, 0))
        m = fc.Symbol("|k|^2", lambda k1, k2, k3: k1**2 + k2**2 + k3**2)
        assert np.abs(fc.apply_symbol(lat, f, m) - f).max() < 1e-12

    def test_abs_k_kills_constant(self, lat):
        f = np.ones((lat.n,) * 3, dtype=complex)
        m = fc.Symbol("|k|", lambda k1, k2, k3: np.sqrt(k1**2 + k2**2 + k3**2))
        assert np.abs(fc.apply_symbol(lat, f, m)).max() < 1e-14

    def test_single_mode_diagonality(self, lat):
        # multiplier maps exp(i k0 x) to m(k0) exp(i k0 x) exactly
        m = fc.Symbol("test", lambda k1, k2, k3: 1.0 + k1**2 + 0.5 * k2 - k3)
        for kvec in ((1, 0, 0), (2, -1, 0), (0, 3, -2)):
            f = plane_wave(lat, kvec)
            expected = (1.0 + kvec[0] ** 2 + 0.5 * kvec[1] - kvec[2]) * f
            assert np.abs(fc.apply_symbol(lat, f, m) - expected).max() < 1e-11

    def test_non_finite_symbol_rejected(self, lat):
        def bad(k1, k2, k3):
            with np.errstate(divide="ignore"):
                return 1.0 / (k1 + k2 + k3)

        with pytest.raises(ValueError):
            fc.apply_symbol(lat, plane_wave(lat, (1, 0, 0)), fc.Symbol("bad", bad))


class TestLambdaEps:
    def test_plane_wave_value(self, lat):
        f = plane_wave(lat, (2, 0, 0))
        out = fc.lambda_eps(lat, f, 0.5, 1)
        assert np.abs(out - np.sqrt(2.0) * f).max() < 1e-12

    def test_constant_unchanged(self, lat):
        f = np.full((lat.n,) * 3, 1.7 + 0.2j)
        for power in (1, -1):
            assert np.abs(fc.lambda_eps(lat, f, 0.3, power) - f).max() < 1e-13

    def test_inverse_value(self, lat):
        f = plane_wave(lat, (2, 0, 0))
        out = fc.lambda_eps(lat, f, 0.5, -1)
        assert np.abs(out - f / np.sqrt(2.0)).max() < 1e-12

    def test_rejects_nonpositive_eps(self, lat):
        with pytest.raises(ValueError):
            fc.lambda_eps(lat, plane_wave(lat, (1, 0, 0)), 0.0, 1)

    @pytest.mark.parametrize("eps", [0.125, 0.25, 0.5, 1.0])
    @pytest.mark.parametrize("r", [0.0, 0.25, 0.5, 1.0])
    def test_inverse_sobolev_bound(self, lat, eps, r):
        # ||lam^-1 f||_{H^s} <= eps^-r ||f||_{H^{s-r}} for 0 <= r <= 1
        f = random_complex(lat, 5)
        sigma = 0.7
        lhs = fc.sobolev_norm(lat, fc.lambda_eps(lat, f, eps, -1), sigma)
        rhs = eps ** (-r) * fc.sobolev_norm(lat, f, sigma - r)
        assert lhs <= rhs * (1 + 1e-12)


class TestHEps:
    def test_eps_zero_is_half_laplacian(self, lat):
        f = plane_wave(lat, (1, 0, 0))
        assert np.abs(fc.h_eps(lat, f, 0.0) - 0.5 * f).max() < 1e-12

    def test_constant_killed(self, lat):
        f = np.ones((lat.n,) * 3, dtype=complex)
        assert np.abs(fc.h_eps(lat, f, 0.7)).max() < 1e-14

    def test_eps_one_value(self, lat):
        f = plane_wave(lat, (1, 0, 0))
        out = fc.h_eps(lat, f, 1.0)
        assert np.abs(out - f / (1.0 + np.sqrt(2.0))).max() < 1e-12

    @pytest.mark.parametrize("eps", [0.125, 0.25, 0.5, 1.0])
    def test_dispersion_gap_bound(self, eps):
        # 0 <= |k|/eps - h_eps(k) <= 1/eps^2 pointwise off the zero mode
        lat = fc.make_lattice(16, TWO_PI)
        nz = ~lat.zero_modes
        gap = lat.k_abs[nz] / eps - fc.h_eps_symbol(lat, eps)[nz]
        assert gap.min() >= 0.0
        assert gap.max() <= 1.0 / eps**2


class TestLeray:
    def test_divergence_free_fixed(self, lat):
        X1, X2, X3 = lat.grid()
        u = np.zeros((3, lat.n, lat.n, lat.n))
        u[0] = np.sin(X2) + np.zeros((lat.n,) * 3)
        assert np.abs(fc.leray_project(lat, u) - u).max() < 1e-13

    def test_gradients_annihilated(self, lat):
        X1, _, _ = lat.grid()
        g = fc.gradient(lat, np.sin(X1) + np.zeros((lat.n,) * 3))
        assert np.abs(fc.leray_project(lat, g)).max() < 1e-13

    def test_per_mode_projector(self, lat):
        X1, _, _ = lat.grid()
        cos1 = np.cos(X1) + np.zeros((lat.n,) * 3)
        u = np.stack([cos1, cos1, np.zeros((lat.n,) * 3)])
        out = fc.leray_project(lat, u)
        assert np.abs(out[0]).max() < 1e-13
        assert np.abs(out[1] - cos1).max() < 1e-13

    def test_idempotent_and_divergence_free(self, lat):
        u = np.stack([random_complex(lat, i).real for i in range(3)])
        pu = fc.leray_project(lat, u)
        assert np.abs(fc.leray_project(lat, pu) - pu).max() < 1e-12
        assert fc.l2_norm(lat, fc.divergence(lat, pu)) < 1e-12


class TestPoisson:
    def test_eigenfunction(self, lat):
        X1, _, _ = lat.grid()
        rho = np.cos(X1) + np.zeros((lat.n,) * 3)
        assert np.abs(fc.poisson_solve(lat, rho) + rho).max() < 1e-13

    def test_constant_source(self, lat):
        rho = np.full((lat.n,) * 3, 3.2)
        assert np.abs(fc.poisson_solve(lat, rho)).max() < 1e-13

    def test_two_modes(self, lat):
        X1, X2, _ = lat.grid()
        rho = np.cos(X1) + np.cos(2 * X2) + np.zeros((lat.n,) * 3)
        expected = -np.cos(X1) - 0.25 * np.cos(2 * X2) + np.zeros((lat.n,) * 3)
        assert np.abs(fc.poisson_solve(lat, rho) - expected).max() < 1e-13

    def test_laplacian_inverts_to_mean_free_source(self, lat):
        # band-limited source: corners carrying the unmatched Nyquist index
        # are zero-like under the lattice convention, so dealias first
        rho = fc.dealias(lat, random_complex(lat, 7).real)
        A0 = fc.poisson_solve(lat, rho)
        assert np.abs(fc.laplacian(lat, A0) - (rho - rho.mean())).max() < 1e-10


class TestLittlewoodPaley:
    def test_unit_frequency_inside_unit_block(self, lat):
        f = plane_wave(lat, (1, 0, 0))
        assert np.abs(fc.littlewood_paley(lat, f, 1.0) - f).max() < 1e-13

    def test_constant_killed(self, lat):
        f = np.ones((lat.n,) * 3, dtype=complex)
        for mu in (0.5, 1.0, 2.0):
            assert np.abs(fc.littlewood_paley(lat, f, mu)).max() < 1e-14

    def test_three_block_resum(self, lat):
        f = plane_wave(lat, (0, 3, 0))
        resum = sum(fc.littlewood_paley(lat, f, mu) for mu in (1.0, 2.0, 4.0))
        assert np.abs(resum - f).max() < 1e-12

    def test_partition_of_unity_random(self, lat):
        f = random_complex(lat, 9)
        fhat = lat.fft(f)
        fhat[lat.zero_modes] = 0.0  # blocks cover only the nonzero modes
        f = lat.ifft(fhat)
        resum = sum(fc.littlewood_paley(lat, f, mu) for mu in fc.dyadic_cover(lat))
        assert np.abs(resum - f).max() < 1e-10

    def test_rejects_non_dyadic(self, lat):
        with pytest.raises(ValueError):
            fc.littlewood_paley(lat, plane_wave(lat, (1, 0, 0)), 3.0)


class TestLowHighSplit:
    def test_low_frequency_all_low(self, lat):
        f = plane_wave(lat, (1, 0, 0))
        low, high = fc.low_high_split(lat, f, 0.01)
        assert np.abs(low - f).max() < 1e-13
        assert np.abs(high).max() < 1e-13

    def test_high_frequency_all_high(self, lat):
        f = plane_wave(lat, (3, 0, 0))
        low, high = fc.low_high_split(lat, f, 10.0)
        assert np.abs(low).max() < 1e-13
        assert np.abs(high - f).max() < 1e-13

    def test_exact_partition(self, lat):
        f = random_complex(lat, 11)
        low, high = fc.low_high_split(lat, f, 0.4)
        assert np.abs(low + high - f).max() < 1e-12

    @pytest.mark.parametrize("eps", [0.25, 0.5])
    def test_high_part_frequency_gain(self, eps):
        # ||f_high||_{H^s} <= eps^sigma ||f_high||_{H^{s+sigma}}
        lat = fc.make_lattice(16, TWO_PI)
        f = random_complex(lat, 13)
        _, high = fc.low_high_split(lat, f, eps)
        for sigma in (0.5, 1.0):
            lhs = fc.sobolev_norm(lat, high, 0.0)
            rhs = eps**sigma * fc.sobolev_norm(lat, high, sigma)
            assert lhs <= rhs * (1 + 1e-12)


class TestNorms:
    def test_constant_l2(self, lat):
        f = np.ones((lat.n,) * 3)
        assert fc.sobolev_norm(lat, f, 0.0) == pytest.approx(TWO_PI**1.5, rel=1e-12)

    def test_plane_wave_h1(self, lat):
        f = plane_wave(lat, (1, 0, 0))
        assert fc.sobolev_norm(lat, f, 1.0) == pytest.approx(np.sqrt(2) * TWO_PI**1.5, rel=1e-12)

    def test_constant_homogeneous_is_zero(self, lat):
        f = np.ones((lat.n,) * 3)
        assert fc.sobolev_norm(lat, f, 1.0, homogeneous=True) == 0.0

    def test_homogeneous_negative_s_requires_mean_free(self, lat):
        f = np.ones((lat.n,) * 3)
        with pytest.raises(ValueError):
            fc.sobolev_norm(lat, f, -0.5, homogeneous=True)

    def test_parseval(self, lat):
        f = random_complex(lat, 15)
        assert fc.sobolev_norm(lat, f, 0.0) == pytest.approx(fc.l2_norm(lat, f), rel=1e-12)

    def test_lp_constant(self, lat):
        f = np.ones((lat.n,) * 3)
        assert fc.lp_norm(lat, f, 2.0) == pytest.approx(TWO_PI**1.5, rel=1e-12)

    def test_lp_zero(self, lat):
        f = np.zeros((lat.n,) * 3)
        for p in (1.0, 2.0, np.inf):
            assert fc.lp_norm(lat, f, p) == 0.0

    def test_lp_infinity_of_sine(self):
        lat = fc.make_lattice(64, TWO_PI)
        X1, _, _ = lat.grid()
        f = np.abs(np.sin(X1)) + np.zeros((64,) * 3)
        assert fc.lp_norm(lat, f, np.inf) == pytest.approx(1.0, abs=1e-3)

    def test_lp_rejects_small_p(self, lat):
        with pytest.raises(ValueError):
            fc.lp_norm(lat, np.ones((lat.n,) * 3), 0.5)


class TestSnapshotIO:
    def test_roundtrip_complex(self, lat, tmp_path):
        f = random_complex(lat, 17, shape=(4, lat.n, lat.n, lat.n))
        path = tmp_path / "field.fld"
        fc.write_fld(path, lat, f, time=0.25)
        header, values = fc.read_fld(path)
        assert header["grid_n"] == lat.n
        assert header["components"] == 4
        assert header["time"] == 0.25
        assert np.array_equal(values, f)

    def test_roundtrip_real_scalar(self, lat, tmp_path):
        f = random_complex(lat, 19).real
        path = tmp_path / "rho.fld"
        fc.write_fld(path, lat, f)
        header, values = fc.read_fld(path)
        assert header["dtype"] == "float64"
        assert np.array_equal(values, f)

    def test_header_is_one_json_line(self, lat, tmp_path):
        path = tmp_path / "x.fld"
        fc.write_fld(path, lat, np.zeros((lat.n,) * 3))
        import json

        with open(path, "rb") as fh:
            json.loads(fh.readline())
