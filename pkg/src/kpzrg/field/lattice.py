"""Periodic space-time lattice, white noise, mollification, heat kernels."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np


class ResolutionError(ValueError):
    pass


@dataclass
class GridSpec:
    """Space-time grid: N spatial points on a circle of length L, step dt."""

    N: int
    dt: float
    t_final: float
    L: float = 2.0 * math.pi

    def __post_init__(self):
        if self.N & (self.N - 1):
            raise ValueError("N must be a power of two")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def nt(self) -> int:
        return int(round(self.t_final / self.dt))

    def xgrid(self) -> np.ndarray:
        return np.arange(self.N) * self.dx

    def wavenumbers(self) -> np.ndarray:
        """rfft wavenumbers (physical, 2*pi/L-spaced)."""
        return 2.0 * math.pi / self.L * np.arange(self.N // 2 + 1)


@dataclass
class MollifierSpec:
    """Space-time bump rho(t,x) = c exp(-1/(1-(4t)^2-x^2)), unit mass.

    Supported in the ellipse (4t)^2 + x^2 < 1 (time radius 1/4, space radius
    1), even in x and in t; `eps` is the parabolic scale: rho_eps(t, x) =
    eps^-3 rho(t/eps^2, x/eps).
    """

    eps: float = 1.0
    shape: str = "bump"
    _norm: float = field(default=0.0, repr=False)

    def __post_init__(self):
        if self.shape != "bump":
            raise ValueError(f"unknown mollifier shape {self.shape!r}")
        ts = np.linspace(-0.25, 0.25, 801)
        xs = np.linspace(-1.0, 1.0, 801)
        tt, xx = np.meshgrid(ts, xs, indexing="ij")
        raw = self._raw(tt, xx)
        self._norm = 1.0 / np.trapezoid(np.trapezoid(raw, xs, axis=1), ts)

    @staticmethod
    def _raw(t, x):
        q = (4.0 * t) ** 2 + x ** 2
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(q < 1.0, np.exp(-1.0 / np.maximum(1.0 - q, 1e-300)), 0.0)

    def base(self, t, x):
        """rho at scale 1."""
        return self._norm * self._raw(np.asarray(t, float), np.asarray(x, float))

    def __call__(self, t, x):
        """rho_eps(t, x)."""
        e = self.eps
        return self.base(np.asarray(t, float) / e ** 2, np.asarray(x, float) / e) / e ** 3

    def spatial_ft(self, tvals: np.ndarray, xis: np.ndarray, nquad: int = 400) -> np.ndarray:
        """rho~(t, xi) = int rho(t, x) cos(xi x) dx at scale 1; shape (nt, nxi)."""
        xs = np.linspace(-1.0, 1.0, nquad)
        vals = self.base(np.asarray(tvals)[:, None], xs[None, :])
        cosmat = np.cos(np.outer(xs, np.asarray(xis)))
        return np.trapezoid(vals[:, :, None] * cosmat[None, :, :], xs, axis=1)

    @property
    def t_radius(self) -> float:
        return 0.25 * self.eps ** 2

    @property
    def x_radius(self) -> float:
        return self.eps


@dataclass
class LatticeField:
    """Values on the (time x space) grid with its spec."""

    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("lattice field contains non-finite values")

    def checksum(self) -> str:
        return hashlib.sha256(self.values.tobytes()).hexdigest()[:16]


def sample_white_noise(grid: GridSpec, seed, nt: Optional[int] = None) -> LatticeField:
    """iid centred Gaussians with variance 1/(dt dx) per cell."""
    rng = np.random.default_rng(seed)
    nt = grid.nt if nt is None else nt
    sigma = 1.0 / math.sqrt(grid.dt * grid.dx)
    vals = rng.standard_normal((nt, grid.N)) * sigma
    return LatticeField(vals, grid)


def mollify(xi: LatticeField, mol: MollifierSpec, pad_value: float = 0.0) -> LatticeField:
    """Space-time convolution with the scaled mollifier.

    Space is periodic (fft); time is linear, with `same` alignment: output
    slice i uses input slices within the mollifier's time radius, and slices
    outside the sampled window count as `pad_value`.  Raises when the grid
    does not resolve the mollifier.
    """
    grid = xi.grid
    if mol.t_radius < 2 * grid.dt or mol.x_radius < 2 * grid.dx:
        raise ResolutionError(
            f"mollifier scale eps={mol.eps} under-resolved by (dt={grid.dt}, dx={grid.dx})"
        )
    half = int(math.ceil(mol.t_radius / grid.dt))
    toff = np.arange(-half, half + 1) * grid.dt
    xs = grid.xgrid()
    xs_wrapped = np.minimum(xs, grid.L - xs)  # signed distance on the circle
    stencil = np.zeros((toff.size, grid.N))
    for i, tv in enumerate(toff):
        stencil[i] = mol(tv, np.where(xs <= grid.L / 2, xs, xs - grid.L))
    stencil *= grid.dt * grid.dx
    sh = np.fft.rfft(stencil, axis=1)
    vh = np.fft.rfft(xi.values, axis=1)
    nt = xi.values.shape[0]
    out = np.zeros_like(vh)
    for i, off in enumerate(range(-half, half + 1)):
        lo = max(0, -off)
        hi = min(nt, nt - off)
        out[lo:hi] += vh[lo + off:hi + off] * sh[i][None, :]
    vals = np.fft.irfft(out, n=grid.N, axis=1)
    return LatticeField(vals, grid)


def mollified_noise(grid: GridSpec, mol: MollifierSpec, seed) -> Tuple[LatticeField, str]:
    """Sample white noise on an extended window and mollify onto [0, t_final].

    Returns the mollified field on the requested window plus the checksum of
    the raw noise — both solvers of a comparison must consume the same draw.
    """
    half = int(math.ceil(mol.t_radius / grid.dt))
    nt = grid.nt + 2 * half
    raw = sample_white_noise(grid, seed, nt=nt)
    smooth = mollify(raw, mol)
    vals = smooth.values[half:half + grid.nt]
    return LatticeField(vals, grid), raw.checksum()


def heat_kernel_modes(k: np.ndarray, t: float) -> np.ndarray:
    """Multipliers exp(-k^2 t) of the periodic heat semigroup."""
    return np.exp(-np.outer(np.atleast_1d(t), k ** 2)).squeeze()


def heat_kernel(tvals: np.ndarray, xvals: np.ndarray, L: float = 2 * math.pi,
                kmax: int = 512) -> np.ndarray:
    """P(t,x) on the circle: sum_k exp(-k^2 t + i k x)/L for t > 0, else 0."""
    t = np.asarray(tvals, float)[:, None]
    x = np.asarray(xvals, float)[None, :]
    ks = np.arange(1, kmax + 1) * (2 * math.pi / L)
    out = np.ones_like(t * x) / L
    damp = np.exp(-np.einsum("k,tx->txk", ks ** 2, np.broadcast_to(t, (t.shape[0], x.shape[1]))) )
    out = out + 2.0 / L * np.einsum("txk,kx->tx", damp,
                                    np.cos(np.outer(ks, x[0])))
    return np.where(t > 0, out, 0.0)
