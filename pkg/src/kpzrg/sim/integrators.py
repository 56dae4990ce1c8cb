"""Spectral exponential integrators for the growth and heat equations.

All solvers share one stepping scheme: exact heat semigroup in Fourier
space, explicit nonlinearity, forward (left-point) noise increment:

    v <- E v + dt phi1(dt L) rfft(nonlinearity + forcing slice)

with E = exp(-k^2 dt) and phi1(z) = (e^z - 1)/z.  Time step must satisfy
dt <= beta dx^2 with beta <= 1/2 for the explicit part to be accurate; the
heat part itself is unconditionally stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..kernels import polyval_lattice
from ..field.lattice import GridSpec, LatticeField


class BlowUpError(RuntimeError):
    def __init__(self, step, norm):
        super().__init__(f"solution blew up at step {step}: sup |h| = {norm:.3e}")
        self.step = step


class PositivityError(RuntimeError):
    def __init__(self, step, zmin, dt):
        super().__init__(
            f"positivity lost at step {step}: min Z = {zmin:.3e}; "
            f"try a smaller step than dt={dt:.3e}"
        )
        self.step = step


@dataclass
class SolveResult:
    values: np.ndarray          # (nt+1, N) trajectory including t=0
    grid: GridSpec
    blown_up: bool = False
    blowup_step: Optional[int] = None
    noise_checksum: str = ""

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]


def _phi1(z: np.ndarray) -> np.ndarray:
    out = np.ones_like(z)
    nz = np.abs(z) > 1e-12
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


def _multipliers(grid: GridSpec):
    k = grid.wavenumbers()
    lam = -(k ** 2) * grid.dt
    return k, np.exp(lam), _phi1(lam)


def solve_growth(grid: GridSpec, noise: np.ndarray, poly_coeffs: np.ndarray,
                 h0: Optional[np.ndarray] = None, shift: float = 0.0,
                 blowup_threshold: float = 1e8, store: str = "all",
                 noise_checksum: str = "") -> SolveResult:
    """d/dt h = dxx h + P(dx h) + shift + noise.

    `poly_coeffs` are ascending coefficients of the slope nonlinearity P
    (typically a Hermite combination of the slope); `noise[i]` forces step i.
    On blow-up the trajectory is truncated and flagged rather than raised.
    """
    nt = noise.shape[0]
    N = grid.N
    k, E, phi1 = _multipliers(grid)
    h = np.zeros(N) if h0 is None else np.asarray(h0, float).copy()
    vh = np.fft.rfft(h)
    out = np.empty((nt + 1, N)) if store == "all" else None
    if out is not None:
        out[0] = h
    coeffs = np.ascontiguousarray(poly_coeffs, dtype=np.float64)
    ik = 1j * k
    for i in range(nt):
        ux = np.fft.irfft(ik * vh, n=N)
        nl = polyval_lattice(ux, coeffs) + noise[i]
        if shift:
            nl = nl + shift
        vh = E * vh + grid.dt * phi1 * np.fft.rfft(nl)
        if not np.isfinite(vh[0]) or i % 16 == 0:
            h = np.fft.irfft(vh, n=N)
            sup = np.max(np.abs(h))
            if not np.isfinite(sup) or sup > blowup_threshold:
                if out is not None:
                    out[i + 1:] = np.nan
                res = SolveResult(out if out is not None else np.array([h]),
                                  grid, True, i, noise_checksum)
                return res
        if out is not None:
            out[i + 1] = np.fft.irfft(vh, n=N)
    if out is None:
        out = np.fft.irfft(vh, n=N)[None, :]
    return SolveResult(out, grid, False, None, noise_checksum)


def solve_she(grid: GridSpec, noise: np.ndarray, lam: float, drift: float,
              z0: np.ndarray, store: str = "all",
              noise_checksum: str = "") -> SolveResult:
    """d/dt Z = dxx Z + lam Z noise - drift Z, multiplicative left-point noise.

    Raises PositivityError as soon as a slice loses strict positivity.
    """
    nt = noise.shape[0]
    N = grid.N
    k, E, phi1 = _multipliers(grid)
    z = np.asarray(z0, float).copy()
    if np.min(z) <= 0:
        raise PositivityError(0, float(np.min(z)), grid.dt)
    vh = np.fft.rfft(z)
    out = np.empty((nt + 1, N)) if store == "all" else None
    if out is not None:
        out[0] = z
    for i in range(nt):
        z = np.fft.irfft(vh, n=N)
        zmin = float(np.min(z))
        if zmin <= 0 or not np.isfinite(zmin):
            raise PositivityError(i, zmin, grid.dt)
        nl = (lam * noise[i] - drift) * z
        vh = E * vh + grid.dt * phi1 * np.fft.rfft(nl)
        if out is not None:
            out[i + 1] = np.fft.irfft(vh, n=N)
    if out is None:
        out = np.fft.irfft(vh, n=N)[None, :]
    return SolveResult(out, grid, False, None, noise_checksum)


def linear_mode_variance(grid: GridSpec, mol) -> np.ndarray:
    """Stationary per-component rfft-mode variance of the linear scheme.

    The update v <- E v + dt phi1 xihat(t_i) with the mollified noise
    correlated across the stencil window gives, per mode k,

        Var = (dt phi1)^2 Var(w-hat) sum_d R_k(d) E^|d| / (1 - E^2)

    with R_k the stencil autocorrelation in the time offset.  This is the
    exact lattice counterpart of the slope-variance constant and is what
    makes the Hermite centering of the nonlinearity hold on the grid.
    """
    N, dt, dx = grid.N, grid.dt, grid.dx
    k = grid.wavenumbers()
    E = np.exp(-(k ** 2) * dt)
    phi1 = _phi1(-(k ** 2) * dt)
    half = int(math.ceil(mol.t_radius / dt))
    toff = np.arange(-half, half + 1) * dt
    xs = grid.xgrid()
    xsw = np.where(xs <= grid.L / 2, xs, xs - grid.L)
    stencil = np.array([mol(tv, xsw) for tv in toff]) * dt * dx
    sh = np.fft.rfft(stencil, axis=1)  # (nstencil, nk)
    varw = N / (2.0 * dt * dx)
    nk = k.size
    out = np.zeros(nk)
    ns = sh.shape[0]
    for ki in range(nk):
        s = sh[:, ki]
        Ek = E[ki]
        if Ek >= 1.0:
            continue
        tot = 0.0
        for d in range(-(ns - 1), ns):
            if d >= 0:
                r = np.real(np.vdot(s[: ns - d], s[d:]))
            else:
                r = np.real(np.vdot(s[-d:], s[: ns + d]))
            tot += r * Ek ** abs(d)
        out[ki] = (dt * phi1[ki]) ** 2 * varw * tot / (1.0 - Ek ** 2)
    return out


def slope_variance(grid: GridSpec, mode_var: np.ndarray) -> float:
    """Var(dx h)(x) of the stationary linear field with given mode variances."""
    k = grid.wavenumbers()
    N = grid.N
    w = np.full(k.size, 2.0)  # complex modes carry Re and Im
    w[0] = 1.0
    if N % 2 == 0:
        w[-1] = 1.0
    return float((2.0 / N ** 2) * np.sum(k ** 2 * w * mode_var))


def sample_stationary_height(grid: GridSpec, mode_var: np.ndarray, rng) -> np.ndarray:
    """A draw of the stationary linear height field (zero spatial mean)."""
    std = np.sqrt(2.0 * mode_var)  # total complex-mode variance
    std[0] = 0.0
    z = rng.standard_normal(grid.N)
    zh = np.fft.rfft(z) * math.sqrt(1.0 / grid.N)  # unit total variance / mode
    return np.fft.irfft(std * zh, n=grid.N)


def burgers_mode_std(grid: GridSpec, rho_hat: np.ndarray) -> np.ndarray:
    """Per-component rfft-mode std of the stationary slope field.

    The slope dynamics dxx u + dx(rho * xi) has per-mode stationary variance
    rho_hat^2 N / (4 dx) per real component (zero for the mean and Nyquist
    modes, which the conservative dynamics never forces).
    """
    N = grid.N
    out = rho_hat * math.sqrt(N / (4.0 * grid.dx))
    out = np.array(out, dtype=float)
    out[0] = 0.0
    if N % 2 == 0:
        out[-1] = 0.0
    return out


def _mode_noise(z: np.ndarray, std: np.ndarray) -> np.ndarray:
    """rfft-mode noise with per-component std from N standard-normal draws."""
    N = z.shape[0]
    zh = np.fft.rfft(z) * math.sqrt(2.0 / N)  # unit variance per component
    return std * zh


def sample_stationary_u0(grid: GridSpec, rho_hat: np.ndarray, rng) -> np.ndarray:
    """A draw from the law the conservative dynamics preserves."""
    std = burgers_mode_std(grid, rho_hat)
    return np.fft.irfft(_mode_noise(rng.standard_normal(grid.N), std), n=grid.N)


def solve_burgers(grid: GridSpec, dW: np.ndarray, f_coeffs: np.ndarray,
                  rho_hat: np.ndarray, u0: np.ndarray, use_covariance: bool = True,
                  store: str = "all") -> SolveResult:
    """Conservative dynamics d/dt u = dxx u + dx Op(F(u)) + dx xi_eps.

    `rho_hat[k]` is the spatial transform of the mollifier at the grid
    wavenumbers; Op convolves with its square (the covariance of the
    space-mollified forcing) unless `use_covariance` is off (the negative
    control).  `dW[i]` holds standard-normal draws per cell.  The linear
    flow and the forcing use the exact one-step transition of the slope
    dynamics, so with F = 0 the law of `sample_stationary_u0` is preserved
    exactly, step by step.
    """
    nt = dW.shape[0]
    N = grid.N
    k = grid.wavenumbers()
    E = np.exp(-(k ** 2) * grid.dt)
    phi1 = _phi1(-(k ** 2) * grid.dt)
    ik = 1j * k
    stat_std = burgers_mode_std(grid, rho_hat)
    step_std = stat_std * np.sqrt(np.maximum(1.0 - E ** 2, 0.0))

    vh = np.fft.rfft(np.asarray(u0, float))
    out = np.empty((nt + 1, N)) if store == "all" else None
    if out is not None:
        out[0] = np.asarray(u0, float)
    cov_mult = rho_hat ** 2 if use_covariance else np.ones_like(rho_hat)
    for i in range(nt):
        u = np.fft.irfft(vh, n=N)
        w = polyval_lattice(u, f_coeffs)
        nl = ik * cov_mult * np.fft.rfft(w)
        vh = E * vh + grid.dt * phi1 * nl + _mode_noise(dW[i], step_std)
        if out is not None:
            out[i + 1] = np.fft.irfft(vh, n=N)
    if out is None:
        out = np.fft.irfft(vh, n=N)[None, :]
    return SolveResult(out, grid, False, None, "")
