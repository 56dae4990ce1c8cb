"""Dyadic kernel decomposition and the convolution exponent calculus."""

from __future__ import annotations

import math
from typing import Dict, Optional, Tuple, Union

import numpy as np

from ..homogeneity import Homogeneity

Label = Union[Homogeneity, float]


class ConvolutionHypothesisError(ValueError):
    pass


def _minL(*xs):
    out = xs[0]
    for x in xs[1:]:
        if _ltL(x, out):
            out = x
    return out


def _ltL(x, y):
    if isinstance(x, Homogeneity) and isinstance(y, Homogeneity):
        return x < y
    return _f(x) < _f(y)


def _f(x):
    return x.numeric(1e-9) if isinstance(x, Homogeneity) else float(x)


def _addL(x, y):
    if isinstance(x, Homogeneity) and isinstance(y, Homogeneity):
        return x + y
    return _f(x) + _f(y)


def convolution_exponents(p1: Tuple[Label, Label], p2: Tuple[Label, Label],
                          scaling_dim: Label = 3, mean_zero_first: bool = False):
    """Exponent bookkeeping for convolving two kernels with (inner, outer) decay.

    Arguments are pairs (alpha, beta): blow-up order at the origin and decay
    order at infinity.  Requires alpha_i < scaling_dim and
    beta_1 + beta_2 > scaling_dim; returns (alpha, beta) of the convolution
    with alpha = max(0, a1+a2-d) and beta = min(b1+b2-d, b1, b2).  With
    `mean_zero_first` (first kernel integrates to zero, needs b1 > d > b2 > 0)
    the decay improves to min(b1+b2-d, b2+1).
    """
    a1, b1 = p1
    a2, b2 = p2
    d = scaling_dim if isinstance(scaling_dim, Homogeneity) else Homogeneity(scaling_dim) \
        if isinstance(scaling_dim, int) else scaling_dim
    for name, a in (("alpha1", a1), ("alpha2", a2)):
        if not _ltL(a, d):
            raise ConvolutionHypothesisError(f"{name} < scaling_dim fails: {a} >= {d}")
    if not _ltL(d, _addL(b1, b2)):
        raise ConvolutionHypothesisError(
            f"beta1 + beta2 > scaling_dim fails: {b1} + {b2} <= {d}"
        )
    zero = Homogeneity(0) if isinstance(a1, Homogeneity) and isinstance(a2, Homogeneity) else 0.0
    asum = _addL(a1, a2)
    alpha = asum - d if isinstance(asum, Homogeneity) and isinstance(d, Homogeneity) else _f(asum) - _f(d)
    if _ltL(alpha, zero):
        alpha = zero
    bsum = _addL(b1, b2)
    main = bsum - d if isinstance(bsum, Homogeneity) and isinstance(d, Homogeneity) else _f(bsum) - _f(d)
    if mean_zero_first:
        if not (_ltL(d, b1) and _ltL(b2, d) and _ltL(zero, b2)):
            raise ConvolutionHypothesisError(
                "mean-zero gain needs beta1 > scaling_dim > beta2 > 0"
            )
        beta = _minL(main, _addL(b2, Homogeneity(1) if isinstance(b2, Homogeneity) else 1.0))
    else:
        beta = _minL(main, b1, b2)
    return alpha, beta


# ---------------------------------------------------------------------------
# dyadic decomposition on a space-time grid
# ---------------------------------------------------------------------------

def _smooth_step(u):
    """C^inf step: 0 for u<=0, 1 for u>=1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.maximum(1 - u, 1e-300)), 0.0)
    return a / (a + b)


def _chi(u):
    """Smooth bump supported on [3/8, 1]."""
    lo, hi = 3.0 / 8.0, 1.0
    rise = _smooth_step((u - lo) / (0.5 - lo))
    fall = 1.0 - _smooth_step((u - 0.75) / (hi - 0.75))
    return rise * fall


def _psi_weights(norms: np.ndarray, n: int) -> np.ndarray:
    """psi(2^n |z|) with psi = chi / sum_m chi(2^m .) (partition of unity)."""
    u = norms * (2.0 ** n)
    total = np.zeros_like(u)
    # chi(2^m u) vanishes unless 2^m u in [3/8, 1]
    vals = _chi(u)
    for m in range(-60, 61):
        total += _chi(u * (2.0 ** m))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(total > 0, vals / np.where(total > 0, total, 1.0), 0.0)
    return out


def _bump_annulus(tt, xx):
    """Smooth bump of the parabolic norm supported in the annulus [1/4, 1/2]."""
    r = np.abs(xx) + np.sqrt(np.abs(tt))
    u = (r - 0.25) / 0.25
    w = np.where((u > 0) & (u < 1), np.exp(-1.0 / np.maximum(u * (1 - u), 1e-300)), 0.0)
    return w


def dyadic_decompose(kernel: np.ndarray, tgrid: np.ndarray, xgrid: np.ndarray,
                     a: float, r: int, n_levels: Optional[int] = None) -> dict:
    """Split a sampled kernel into annular pieces at dyadic parabolic scales.

    `kernel[i, j]` samples K(t_i, x_j) on a uniform grid covering the unit
    parabolic ball.  Pieces n = 0 .. n_levels-1 are supported in
    2^-(n+2) <= |z| <= 2^-n (the last one keeps everything below its scale so
    the pieces sum to K exactly); for r < 0 the pieces n > 0 get bump
    corrections that transfer the moments of scaled degree < |r| to piece 0,
    so each later piece kills those moments.

    Returns the pieces plus reassembly / moment / support diagnostics.
    """
    dt = float(tgrid[1] - tgrid[0])
    dx = float(xgrid[1] - xgrid[0])
    tt, xx = np.meshgrid(tgrid, xgrid, indexing="ij")
    norms = np.abs(xx) + np.sqrt(np.abs(tt))
    if n_levels is None:
        # finest scale still resolved by a few grid cells
        n_levels = max(2, int(math.floor(-math.log2(8 * max(dx, math.sqrt(dt))))))

    weights = [_psi_weights(norms, n) for n in range(n_levels)]
    # fold everything below scale 0 into piece 0, everything beyond the last
    # resolved scale into the final piece
    w0_extra = np.zeros_like(norms)
    for n in range(-8, 0):
        w0_extra += _psi_weights(norms, n)
    weights[0] = weights[0] + w0_extra
    tail = np.ones_like(norms)
    for w in weights:
        tail = tail - w
    tail[norms == 0] = 0.0
    weights[-1] = weights[-1] + np.clip(tail, 0.0, None)

    pieces = [w * kernel for w in weights]

    moments: Dict[Tuple[int, int], float] = {}
    if r < 0:
        mom_idx = [(k0, k1) for k0 in range(0, (-r + 1) // 2 + 1)
                   for k1 in range(0, -r + 1) if 2 * k0 + k1 < -r]
        etas = _moment_bumps(tt, xx, mom_idx, dt, dx)
        # I_k = full-kernel moments, then the telescoping transfer
        I = {k: float(np.sum(kernel * tt ** k[0] * xx ** k[1]) * dt * dx) for k in mom_idx}
        Iprev = {}
        for k in mom_idx:
            Iprev[k] = I[k] - float(np.sum(pieces[0] * tt ** k[0] * xx ** k[1]) * dt * dx)
        for k in mom_idx:
            pieces[0] = pieces[0] + etas[k](0) * Iprev[k]
        for n in range(1, n_levels):
            Icur = {}
            for k in mom_idx:
                Icur[k] = Iprev[k] - float(
                    np.sum(weights[n] * kernel * tt ** k[0] * xx ** k[1]) * dt * dx
                )
            for k in mom_idx:
                if not np.isfinite(Icur[k]):
                    raise ValueError("moment correction overflow: non-finite moments")
                pieces[n] = pieces[n] + etas[k](n) * Icur[k] - etas[k](n - 1) * Iprev[k]
            Iprev = Icur

    total = sum(pieces)
    mask = norms > 0
    reassembly_error = float(np.max(np.abs((total - kernel)[mask])))
    piece_moments = []
    if r < 0:
        for n in range(n_levels):
            piece_moments.append(
                {k: float(np.sum(pieces[n] * tt ** k[0] * xx ** k[1]) * dt * dx)
                 for k in mom_idx}
            )
    sup_bounds = [float(np.max(np.abs(p))) * 2.0 ** (-a * n) for n, p in enumerate(pieces)]
    support_ok = all(
        not np.any(np.abs(pieces[n])[(norms > 2.0 ** (-n) + 2 * (dx + math.sqrt(dt)))] > 0)
        for n in range(1, n_levels - 1)
    )
    return {
        "pieces": pieces,
        "n_levels": n_levels,
        "reassembly_error": reassembly_error,
        "piece_moments": piece_moments,
        "scaled_sup_bounds": sup_bounds,
        "support_ok": support_ok,
    }


def _moment_bumps(tt, xx, mom_idx, dt, dx):
    """Bumps eta_k in the annulus [1/4,1/2] with int z^l eta_k = delta_{kl}.

    Built from the annulus bump times monomials by solving the small moment
    system; each returned callable gives the parabolically rescaled version
    2^(3n) eta(2^(2n) t, 2^n x).
    """
    base = _bump_annulus(tt, xx)
    basis = [base * tt ** k0 * xx ** k1 for (k0, k1) in mom_idx]
    A = np.array(
        [[float(np.sum(b * tt ** l0 * xx ** l1) * dt * dx) for b in basis]
         for (l0, l1) in mom_idx]
    )
    coef = np.linalg.solve(A, np.eye(len(mom_idx)))

    def make(k):
        ci = coef[:, mom_idx.index(k)]

        def scaled(n):
            ttn = tt * 4.0 ** n
            xxn = xx * 2.0 ** n
            b = _bump_annulus(ttn, xxn)
            out = np.zeros_like(tt)
            for c, (k0, k1) in zip(ci, mom_idx):
                out += c * b * ttn ** k0 * xxn ** k1
            return out * 8.0 ** n

        return scaled

    return {k: make(k) for k in mom_idx}
