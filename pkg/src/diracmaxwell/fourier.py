"""Periodic Fourier lattice and the spectral operator toolbox.

Everything downstream (Dirac, wave and Schrodinger propagators, projections,
norms) is built on the plain-numpy primitives in this module.  Conventions,
fixed once and for all:

* The domain is the torus ``[0, L)^3`` sampled on an ``n**3`` grid.  Fields
  are bare ndarrays; scalars have shape ``(n, n, n)`` and multi-component
  fields carry a leading axis (3 for vectors, 2/4 for spinors).
* Dual frequencies are ``k * 2*pi/L`` with ``k in {-n/2, ..., n/2 - 1}`` per
  axis, stored in FFT order.  The unmatched Nyquist index ``-n/2`` has no
  conjugate partner on the grid, so every symbol is evaluated with that
  frequency component replaced by zero (``lat.kx/ky/kz``).  Odd symbols such
  as derivatives therefore annihilate Nyquist content and real fields stay
  real; modes whose zeroed frequency vanishes entirely (the mean mode and the
  Nyquist "corners") behave like the zero mode and are dropped wherever an
  inverse symbol or a homogeneous weight would be singular.
* Poisson inversion uses the jellium convention: the source mean is removed
  and the solution mean is pinned to zero.

Everything here is a pure function of immutable inputs (the Lattice caches
are computed once and never mutated), so concurrent use from multiple
threads is safe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

_SPATIAL_AXES = (-3, -2, -1)


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t<=0, 1 for t>=1, strictly monotone between."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        b = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return a / (a + b)


def bump_profile(r: np.ndarray) -> np.ndarray:
    """Radial cutoff theta(r): 1 on r<=1, 0 on r>=2, smooth in between.

    The Littlewood-Paley block at scale mu uses beta(xi) = theta(|xi|) -
    theta(2|xi|), supported on 1/2 <= |xi| <= 2, and sum_j beta(xi/2^j) = 1
    for xi != 0 by telescoping.
    """
    return 1.0 - _smooth_step(np.asarray(r, dtype=float) - 1.0)


@dataclass(frozen=True)
class Lattice:
    """Uniform periodic grid on [0, L)^3 together with its dual lattice."""

    n: int
    period: float
    # broadcastable frequency arrays with the Nyquist component zeroed
    kx: np.ndarray = field(init=False, repr=False, compare=False)
    ky: np.ndarray = field(init=False, repr=False, compare=False)
    kz: np.ndarray = field(init=False, repr=False, compare=False)
    k_sq: np.ndarray = field(init=False, repr=False, compare=False)
    k_abs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n, L = self.n, self.period
        if n % 2 != 0 or n < 4:
            raise ValueError(f"grid size n must be even and >= 4, got {n}")
        if not (L > 0):
            raise ValueError(f"period must be positive, got {L}")
        freq = 2.0 * np.pi / L * np.fft.fftfreq(n, d=1.0 / n)
        sym = freq.copy()
        sym[n // 2] = 0.0  # unmatched Nyquist mode: zeroed in all symbols
        object.__setattr__(self, "kx", sym.reshape(n, 1, 1))
        object.__setattr__(self, "ky", sym.reshape(1, n, 1))
        object.__setattr__(self, "kz", sym.reshape(1, 1, n))
        k_sq = self.kx**2 + self.ky**2 + self.kz**2
        object.__setattr__(self, "k_sq", k_sq)
        object.__setattr__(self, "k_abs", np.sqrt(k_sq))

    # -- geometry ----------------------------------------------------------

    @property
    def cell_volume(self) -> float:
        return (self.period / self.n) ** 3

    @property
    def volume(self) -> float:
        return self.period**3

    def axis_frequencies(self, raw: bool = False) -> np.ndarray:
        """Per-axis dual frequencies in FFT order; raw keeps the -n/2 mode."""
        freq = 2.0 * np.pi / self.period * np.fft.fftfreq(self.n, d=1.0 / self.n)
        if not raw:
            freq = freq.copy()
            freq[self.n // 2] = 0.0
        return freq

    def grid(self):
        """Sparse physical coordinate arrays (X1, X2, X3)."""
        x = np.arange(self.n) * (self.period / self.n)
        return (
            x.reshape(self.n, 1, 1),
            x.reshape(1, self.n, 1),
            x.reshape(1, 1, self.n),
        )

    @property
    def zero_modes(self) -> np.ndarray:
        """Mask of modes whose effective frequency vanishes (mean + corners)."""
        return self.k_sq == 0.0

    # -- transforms ---------------------------------------------------------

    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.fftn(np.asarray(f), axes=_SPATIAL_AXES)

    def ifft(self, fhat: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(fhat, axes=_SPATIAL_AXES)

    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: True on modes kept (|index| <= n/3 per axis)."""
        idx = np.fft.fftfreq(self.n, d=1.0 / self.n)
        keep = np.abs(idx) <= self.n / 3.0
        return (
            keep.reshape(self.n, 1, 1)
            & keep.reshape(1, self.n, 1)
            & keep.reshape(1, 1, self.n)
        )


def make_lattice(n: int, L: float) -> Lattice:
    return Lattice(n, L)


@dataclass(frozen=True)
class Symbol:
    """Scalar Fourier multiplier: a named pure function of (k1, k2, k3)."""

    name: str
    fn: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

    def on(self, lat: Lattice) -> np.ndarray:
        values = np.asarray(self.fn(lat.kx, lat.ky, lat.kz))
        values = np.broadcast_to(values, (lat.n, lat.n, lat.n))
        if not np.all(np.isfinite(values)):
            raise ValueError(f"symbol {self.name!r} not finite on the lattice")
        return values


def apply_symbol(lat: Lattice, f: np.ndarray, m: Symbol | np.ndarray) -> np.ndarray:
    """Multiply the Fourier coefficients of f pointwise by m(k)."""
    mult = m.on(lat) if isinstance(m, Symbol) else m
    return lat.ifft(mult * lat.fft(f))


def apply_symbol_real(lat: Lattice, f: np.ndarray, m: Symbol | np.ndarray) -> np.ndarray:
    """apply_symbol for real fields under real-output-preserving symbols."""
    return apply_symbol(lat, f, m).real


def dealias(lat: Lattice, f: np.ndarray) -> np.ndarray:
    """Band-limit f to the 2/3 block (mandatory for exact identity checks)."""
    out = lat.ifft(lat.dealias_mask() * lat.fft(f))
    return out.real if np.isrealobj(f) else out


# -- paper-specific multipliers ---------------------------------------------


def lambda_eps(lat: Lattice, f: np.ndarray, eps: float, power: int = 1) -> np.ndarray:
    """Apply (1 + eps^2 |k|^2)^(power/2), power in {+1, -1}."""
    if not (eps > 0):
        raise ValueError(f"eps must be positive, got {eps}")
    if power not in (1, -1):
        raise ValueError(f"power must be +1 or -1, got {power}")
    mult = np.sqrt(1.0 + eps**2 * lat.k_sq)
    if power == -1:
        mult = 1.0 / mult
    return apply_symbol(lat, f, mult)


def h_eps_symbol(lat: Lattice, eps: float) -> np.ndarray:
    """Symbol |k|^2 / (1 + sqrt(1 + eps^2 |k|^2)); |k|^2/2 at eps = 0."""
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    return lat.k_sq / (1.0 + np.sqrt(1.0 + eps**2 * lat.k_sq))


def h_eps(lat: Lattice, f: np.ndarray, eps: float) -> np.ndarray:
    """Apply the nonrelativistic dispersion h_eps; tends to -Delta/2 symbol."""
    return apply_symbol(lat, f, h_eps_symbol(lat, eps))


# -- projections and inverses ------------------------------------------------


def gradient(lat: Lattice, f: np.ndarray) -> np.ndarray:
    fhat = lat.fft(f)
    out = np.stack(
        [
            lat.ifft(1j * lat.kx * fhat),
            lat.ifft(1j * lat.ky * fhat),
            lat.ifft(1j * lat.kz * fhat),
        ]
    )
    return out.real if np.isrealobj(f) else out


def divergence(lat: Lattice, u: np.ndarray) -> np.ndarray:
    uhat = lat.fft(u)
    dhat = 1j * (lat.kx * uhat[0] + lat.ky * uhat[1] + lat.kz * uhat[2])
    out = lat.ifft(dhat)
    return out.real if np.isrealobj(u) else out


def curl(lat: Lattice, u: np.ndarray) -> np.ndarray:
    uhat = lat.fft(u)
    out = np.stack(
        [
            lat.ifft(1j * (lat.ky * uhat[2] - lat.kz * uhat[1])),
            lat.ifft(1j * (lat.kz * uhat[0] - lat.kx * uhat[2])),
            lat.ifft(1j * (lat.kx * uhat[1] - lat.ky * uhat[0])),
        ]
    )
    return out.real if np.isrealobj(u) else out


def laplacian(lat: Lattice, f: np.ndarray) -> np.ndarray:
    out = apply_symbol(lat, f, -lat.k_sq)
    return out.real if np.isrealobj(f) else out


def leray_project(lat: Lattice, u: np.ndarray) -> np.ndarray:
    """Project onto divergence-free fields: per mode I - k k^T / |k|^2."""
    uhat = lat.fft(u)
    with np.errstate(invalid="ignore", divide="ignore"):
        k_dot_u = (lat.kx * uhat[0] + lat.ky * uhat[1] + lat.kz * uhat[2]) / lat.k_sq
    k_dot_u[..., lat.zero_modes] = 0.0  # identity where k = 0
    phat = np.stack(
        [uhat[0] - lat.kx * k_dot_u, uhat[1] - lat.ky * k_dot_u, uhat[2] - lat.kz * k_dot_u]
    )
    out = lat.ifft(phat)
    return out.real if np.isrealobj(u) else out


def poisson_solve(lat: Lattice, rho: np.ndarray) -> np.ndarray:
    """Solve Delta A0 = rho - mean(rho) with zero-mean A0 (jellium)."""
    rhohat = lat.fft(rho)
    with np.errstate(invalid="ignore", divide="ignore"):
        sol = rhohat / (-lat.k_sq)
    sol[..., lat.zero_modes] = 0.0
    out = lat.ifft(sol)
    return out.real if np.isrealobj(rho) else out


def inv_abs_nabla(lat: Lattice, f: np.ndarray, power: float = 1.0) -> np.ndarray:
    """Apply |nabla|^(-power); mean-like modes are mapped to zero."""
    fhat = lat.fft(f)
    with np.errstate(invalid="ignore", divide="ignore"):
        mult = lat.k_abs ** (-power)
    mult = np.where(lat.zero_modes, 0.0, mult)
    out = lat.ifft(mult * fhat)
    return out.real if np.isrealobj(f) else out


def riesz_transform(lat: Lattice, f: np.ndarray, j: int) -> np.ndarray:
    """R_j = |nabla|^{-1} d_j as a single multiplier."""
    k = (lat.kx, lat.ky, lat.kz)[j]
    with np.errstate(invalid="ignore", divide="ignore"):
        mult = 1j * k / lat.k_abs
    mult = np.where(lat.zero_modes, 0.0, mult)
    return apply_symbol(lat, f, mult)


# -- dyadic decomposition -----------------------------------------------------


def littlewood_paley(lat: Lattice, f: np.ndarray, mu: float) -> np.ndarray:
    """Dyadic block: multiply by beta(k/mu), beta supported on 1/2<=|k|<=2."""
    j = np.log2(mu)
    if not np.isclose(j, np.round(j)):
        raise ValueError(f"mu must be a dyadic number 2^j, got {mu}")
    r = lat.k_abs / mu
    beta = bump_profile(r) - bump_profile(2.0 * r)
    return apply_symbol(lat, f, beta)


def dyadic_cover(lat: Lattice) -> list[float]:
    """Dyadic scales whose blocks resum to the identity on nonzero modes."""
    k_min = 2.0 * np.pi / lat.period
    k_max = float(np.max(lat.k_abs))
    j_lo = int(np.floor(np.log2(k_min)))
    j_hi = int(np.ceil(np.log2(k_max))) + 1
    return [2.0**j for j in range(j_lo, j_hi + 1)]


def low_high_split(lat: Lattice, f: np.ndarray, eps: float):
    """Smooth split at |k| ~ 1/eps (transition width factor 2); exact sum."""
    if not (eps > 0):
        raise ValueError(f"eps must be positive, got {eps}")
    low = apply_symbol(lat, f, bump_profile(eps * lat.k_abs))
    if np.isrealobj(f):
        low = low.real
    return low, f - low


# -- norms --------------------------------------------------------------------


def sobolev_norm(lat: Lattice, f: np.ndarray, s: float, homogeneous: bool = False) -> float:
    """H^s (or homogeneous Hdot^s) norm, matching the L^2 norm at s = 0.

    Multi-component fields are summed over the leading axes.  The zero-like
    modes (zeroed Nyquist corners included) are dropped from homogeneous
    norms; a homogeneous norm with s < 0 requires a mean-free field.
    """
    fhat = lat.fft(f)
    power = np.abs(fhat) ** 2
    if power.ndim > 3:
        power = power.reshape(-1, lat.n, lat.n, lat.n).sum(axis=0)
    if homogeneous:
        if s < 0:
            mean_sq = power[0, 0, 0] / lat.n**6
            if mean_sq > 1e-24:
                raise ValueError("homogeneous norm with s < 0 needs mean-zero input")
        with np.errstate(invalid="ignore", divide="ignore"):
            w = lat.k_sq**s
        w = np.where(lat.zero_modes, 0.0, w)
    else:
        w = (1.0 + lat.k_sq) ** s
    total = float(np.sum(w * power)) * lat.volume / lat.n**6
    return float(np.sqrt(total))


def l2_norm(lat: Lattice, f: np.ndarray) -> float:
    f = np.asarray(f)
    return float(np.sqrt(np.sum(np.abs(f) ** 2) * lat.cell_volume))


def lp_norm(lat: Lattice, f: np.ndarray, p: float) -> float:
    """Grid quadrature of the pointwise magnitude; p = inf gives the max."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    f = np.asarray(f)
    mag = np.abs(f)
    if mag.ndim > 3:
        mag = np.sqrt((mag**2).reshape(-1, *mag.shape[-3:]).sum(axis=0))
    if np.isinf(p):
        return float(mag.max())
    return float((np.sum(mag**p) * lat.cell_volume) ** (1.0 / p))


# -- snapshot format ----------------------------------------------------------


def write_fld(path, lat: Lattice, values: np.ndarray, time: float = 0.0) -> None:
    """Write a field snapshot: one-line JSON header + little-endian payload."""
    values = np.asarray(values)
    components = 1 if values.ndim == 3 else int(np.prod(values.shape[:-3]))
    complex_data = np.iscomplexobj(values)
    header = {
        "grid_n": lat.n,
        "period": lat.period,
        "components": components,
        "dtype": "complex128" if complex_data else "float64",
        "time": float(time),
    }
    payload = np.ascontiguousarray(values, dtype="<c16" if complex_data else "<f8")
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("ascii"))
        fh.write(payload.tobytes())


def read_fld(path):
    """Read a .fld snapshot; returns (header dict, values ndarray)."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("ascii"))
        raw = fh.read()
    n = header["grid_n"]
    c = header["components"]
    dtype = "<c16" if header["dtype"] == "complex128" else "<f8"
    values = np.frombuffer(raw, dtype=dtype).reshape((c, n, n, n) if c > 1 else (n, n, n))
    return header, values.astype(values.dtype.newbyteorder("="))
