"""Graph constants of the renormalised models, evaluated in mode space.

Every kernel in these graphs is built from the periodic heat kernel and the
mollifier, so each spatial Fourier mode evolves by exact exponentials in
time.  Fields are represented by their mode coefficients on a quadratically
warped time grid (fine near t = 0 at the mollifier scale); mollified kernels
are exact exponential smears of small quadrature tables (see
kernels.exp_smear), pointwise space products are mode convolutions per time
slice, and the outer integrals are warped-grid quadratures.  This resolves
three decades of scales without a dense space-time grid.

Conventions: f(t, x) = sum_k fhat_k(t) e^{ikx} on the circle of length 2 pi;
int f g dx = 2 pi sum_k fhat_k conj(ghat_k); space-time convolution acts
per mode as 2 pi (fhat_k *_t ghat_k).

The pair correlation of the slope of the linearised solution plays the
central role: with Keps' = rho_eps * P' one has

    Pe := Keps' * Keps'(-.)  =  rho2_eps * PK,

where rho2_eps = rho_eps * rho_eps(-.) and PK = P' * P'(-.) has modes
exp(-k^2 |t|)/(4 pi) for k != 0 (and zero mean mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import factorial
from typing import Dict, Optional, Tuple

import numpy as np

from ..kernels import exp_smear
from .lattice import MollifierSpec


def warped_time_grid(smax: float, ds: float, two_sided: bool = False):
    """t = sign(s) s^2 on a uniform s-grid; returns (t, quadrature weights)."""
    s = np.arange(ds / 2, smax, ds)
    t = s ** 2
    w = 2.0 * s * ds
    if not two_sided:
        return t, w
    tt = np.concatenate([-t[::-1], t])
    ww = np.concatenate([w[::-1], w])
    return tt, ww


class ModeEngine:
    """Mode-space fields for one mollifier scale.

    kmax bounds the retained wavenumbers of mollified kernels (the mollifier
    transform is negligible beyond |eps k| ~ 30); raw heat-kernel factors use
    per-slice adaptive mode counts.
    """

    def __init__(self, mol: MollifierSpec, eps: float, kmax: Optional[int] = None,
                 smax: float = 2.85, ds: Optional[float] = None, ncore: int = 65):
        self.eps = float(eps)
        self.mol = MollifierSpec(eps=self.eps, shape=mol.shape)
        if kmax is None:
            kmax = int(math.ceil(30.0 / self.eps))
        self.kmax = kmax
        self.ks = np.arange(1, kmax + 1, dtype=float)  # k > 0; fields even/odd in k
        self.k2 = self.ks ** 2
        if ds is None:
            ds = min(self.eps / 8.0, 0.02)
        self.ds = ds
        self.smax = smax

        # rho_eps-hat_k on a fine tau-core (|tau| <= eps^2/4)
        e2 = self.eps ** 2
        self.tau1 = np.linspace(-0.25 * e2, 0.25 * e2, ncore)
        base_ft = self.mol.spatial_ft(self.tau1 / e2, self.eps * self.ks)
        self.rho_hat = base_ft / (2.0 * math.pi * e2)  # (ncore, nk)

        # rho2_eps-hat_k on |tau| <= eps^2/2: 2 pi * self-correlation of rho-hat,
        # done by index shifts on the uniform tau core (rho-hat is real)
        self.tau2 = np.linspace(-0.5 * e2, 0.5 * e2, 2 * ncore - 1)
        dtau = self.tau1[1] - self.tau1[0]
        r2 = np.zeros((self.tau2.size, kmax))
        half = (self.tau2.size - 1) // 2  # tau2[j] = (j - half) * dtau
        for j in range(self.tau2.size):
            shift = j - half
            if shift >= 0:
                a = self.rho_hat[shift:]
                b = self.rho_hat[: self.rho_hat.shape[0] - shift]
            else:
                a = self.rho_hat[: self.rho_hat.shape[0] + shift]
                b = self.rho_hat[-shift:]
            r2[j] = 2.0 * math.pi * (a * b).sum(axis=0) * dtau
        self.rho2_hat = r2  # (ntau2, nk)

    # -- mollified pair correlation ------------------------------------------
    def pe_hat(self, tgrid: np.ndarray) -> np.ndarray:
        """Modes of Pe on tgrid, shape (nt, kmax) for k = 1..kmax."""
        dtau = self.tau2[1] - self.tau2[0]
        table = self.rho2_hat * dtau / (4.0 * math.pi)  # x PK modes 1/(4 pi)
        out = 2.0 * math.pi * exp_smear(tgrid, self.tau2, table, self.k2, mode=0)
        return out

    def keps_hat_imag(self, tgrid: np.ndarray) -> np.ndarray:
        """Keps'-hat_k(t) = i k * L_k(t); returns the real factor L times k.

        L_k(t) = int rho_eps-hat_k(tau) exp(-k^2 (t - tau)) 1_{tau <= t} dtau.
        """
        dtau = self.tau1[1] - self.tau1[0]
        table = self.rho_hat * dtau
        lap = exp_smear(tgrid, self.tau1, table, self.k2, mode=2)
        return lap * self.ks[None, :]

    # -- constants -------------------------------------------------------------
    def c0_eps(self) -> float:
        """Squared L2 norm of the mollified heat-derivative kernel."""
        t, w = warped_time_grid(self.smax, self.ds, two_sided=True)
        kk = self.keps_hat_imag(t)
        # |i k L|^2 summed over k != 0 (even in k: factor 2)
        dens = 2.0 * (kk ** 2).sum(axis=1)
        return float(2.0 * math.pi * (dens * w).sum())

    def c3(self) -> float:
        """int Pe^2 PK over space-time."""
        t, w = warped_time_grid(self.smax, self.ds, two_sided=True)
        pe = self.pe_hat(t)  # (nt, k>0)
        total = 0.0
        for i in range(t.size):
            full = _full_modes(pe[i])           # k = -kmax..kmax
            sq = np.convolve(full, full)        # modes of Pe^2, index offset 2kmax
            pk = _pk_modes(self.kmax * 2, t[i])  # same layout
            total += w[i] * (sq * pk).sum()
        return float(2.0 * math.pi * total)

    def c2(self) -> float:
        """int G S with G = K' Pe pointwise and S = K' time-space correlated with Pe."""
        t, w = warped_time_grid(self.smax, self.ds, two_sided=False)
        pe = self.pe_hat(t)
        # S-hat_k = -i k F_k with F from the exact Laplace smear
        dtau = self.tau2[1] - self.tau2[0]
        table = self.rho2_hat * dtau / (4.0 * math.pi)
        F = 2.0 * math.pi * exp_smear(t, self.tau2, table, self.k2, mode=1)
        total = 0.0
        for i in range(t.size):
            g = self._g_slice(pe[i], t[i])      # real odd part: G-hat_k = i g_k
            # sum over all k of G conj(S): G = i g, S = -i k F -> product g k F
            ks = np.arange(1, self.kmax + 1, dtype=float)
            contrib = -2.0 * (g * ks * F[i]).sum()
            total += w[i] * contrib
        return float(2.0 * math.pi * total)

    def _g_slice(self, pe_row: np.ndarray, tval: float) -> np.ndarray:
        """g_k(t) with (K' Pe)-hat_k = i g_k, for k = 1..kmax."""
        qmax = int(min(6.0 / math.sqrt(max(tval, 1e-12)), 12.0 / self.eps + self.kmax))
        qmax = max(qmax, 8)
        q = np.arange(-qmax, qmax + 1, dtype=float)
        kp = q * np.exp(-q ** 2 * tval) / (2.0 * math.pi)  # K'-hat_q = i * kp_q
        pe_full = np.zeros(2 * self.kmax + 1)
        pe_full[self.kmax + 1:] = pe_row
        pe_full[:self.kmax] = pe_row[::-1]
        conv = np.convolve(kp, pe_full)
        # index of mode k in conv: offset qmax + kmax
        off = qmax + self.kmax
        out = np.empty(self.kmax)
        for k in range(1, self.kmax + 1):
            out[k - 1] = conv[off + k]
        return out


def _full_modes(pos_row: np.ndarray) -> np.ndarray:
    """Even extension of k>0 modes to k = -kmax..kmax with zero mean mode."""
    kmax = pos_row.size
    full = np.zeros(2 * kmax + 1)
    full[kmax + 1:] = pos_row
    full[:kmax] = pos_row[::-1]
    return full


def _pk_modes(kmax: int, tval: float) -> np.ndarray:
    ks = np.arange(-kmax, kmax + 1, dtype=float)
    out = np.exp(-ks ** 2 * abs(tval)) / (4.0 * math.pi)
    out[kmax] = 0.0
    return out


def constant_C0(mol: MollifierSpec, resolution: int = 65, refine: bool = True) -> dict:
    """The scale-one squared norm of the mollified heat-derivative kernel.

    Returns the value with a refinement-based error estimate: the engine is
    re-run at double the core resolution and half the warped step.
    """
    e1 = ModeEngine(mol, eps=1.0, ncore=resolution)
    v1 = e1.c0_eps()
    out = {"value": v1, "error": None}
    if refine:
        e2 = ModeEngine(mol, eps=1.0, ncore=2 * resolution - 1, ds=e1.ds / 2)
        v2 = e2.c0_eps()
        out = {"value": v2, "error": abs(v2 - v1)}
        if abs(v2 - v1) > 0.02 * abs(v2):
            out["flag"] = "refinement moved the value by more than 2%"
    return out


def constant_C0_eps(mol: MollifierSpec, eps: float, **kw) -> float:
    return ModeEngine(mol, eps=eps, **kw).c0_eps()


def renorm_constants_C2_C3(mol: MollifierSpec, eps_list, **kw) -> dict:
    """Table of the two log-divergent constants and their combination.

    Returns rows {eps, C0eps, C2, C3, combo} plus straight-line fits of each
    column against log(1/eps).
    """
    rows = []
    for eps in eps_list:
        eng = ModeEngine(mol, eps=eps, **kw)
        c2 = eng.c2()
        c3 = eng.c3()
        rows.append(
            {"eps": eps, "C0eps": eng.c0_eps(), "C2": c2, "C3": c3, "combo": c3 + 4.0 * c2}
        )
    logs = np.log(1.0 / np.array([r["eps"] for r in rows]))

    def fit(key):
        ys = np.array([r[key] for r in rows])
        b, a = np.polyfit(logs, ys, 1)
        pred = a + b * logs
        ss_res = float(((ys - pred) ** 2).sum())
        ss_tot = float(((ys - ys.mean()) ** 2).sum())
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        return {"intercept": float(a), "slope": float(b), "r_squared": r2}

    return {"rows": rows, "fits": {k: fit(k) for k in ("C0eps", "C2", "C3", "combo")}}


# ---------------------------------------------------------------------------
# the three-index constants
# ---------------------------------------------------------------------------

def ctau_pairing(l: int, m: int, n: int, variant: int) -> Optional[Tuple[int, int, int]]:
    """Leg-pairing counts (a, b, c) between the three vertex groups.

    variant 1: a+b = 2l,   a+c = 2m+2, b+c = 2n+2;
    variant 2: a+c = 2l+1, a+b = 2m+1, b+c = 2n+2.
    Returns None when no nonnegative integer solution exists.
    """
    if variant == 1:
        a = l + m - n
        b = l + n - m
        c = m + n + 2 - l
    elif variant == 2:
        a = l + m - n
        c = l + n - m + 1
        b = m + n + 1 - l
    else:
        raise ValueError("variant must be 1 or 2")
    if a < 0 or b < 0 or c < 0:
        return None
    return a, b, c


def ctau_combinatorial_factor(l: int, m: int, n: int, variant: int) -> int:
    """(2m+2)!(2n+2)!(2l)!/(a!b!c!) for variant 1 (2l+1/2m+1 in variant 2)."""
    pair = ctau_pairing(l, m, n, variant)
    if pair is None:
        return 0
    a, b, c = pair
    if variant == 1:
        num = factorial(2 * m + 2) * factorial(2 * n + 2) * factorial(2 * l)
    else:
        num = factorial(2 * m + 1) * factorial(2 * n + 2) * factorial(2 * l + 1)
    return num // (factorial(a) * factorial(b) * factorial(c))


def ctau_constant(l: int, m: int, n: int, eps: float, mol: MollifierSpec,
                  variant: int = 1, nx: int = 128, t_max: float = 5.0,
                  nt_per_eps2: int = 24) -> float:
    """Value of the three-index constant at one mollifier scale.

    Zero when the pairing is infeasible or when no legs join the two inner
    vertices (the resulting factorised integrals carry odd kernels).
    Otherwise evaluates the two-vertex graph

        eps^(l+m+n) C_{lmn} int K'(-z) K'(-+w) Pe^b(z) Pe^a(w) Pe^c(z-w)

    (second kernel reversed in the second variant) on a uniform space-time
    grid: the mode-space pair correlation is rendered to real space and the
    double integral collapses through one space-time convolution.  The time
    step must resolve eps^2, so this is meant for moderate eps.
    """
    pair = ctau_pairing(l, m, n, variant)
    if pair is None:
        return 0.0
    a, b, c = pair
    if c == 0:
        return 0.0
    comb = ctau_combinatorial_factor(l, m, n, variant)

    dt = eps ** 2 / nt_per_eps2
    nt = 2 * int(t_max / dt) + 1
    t = (np.arange(nt) - nt // 2) * dt
    L = 2.0 * math.pi
    dx = L / nx
    x = np.arange(nx) * dx
    xs = np.where(x <= L / 2, x, x - L)
    kmax = nx // 3  # leave headroom against spatial aliasing in Pe^c
    eng = ModeEngine(mol, eps=eps, kmax=min(kmax, int(math.ceil(30.0 / eps))))
    pe_modes = eng.pe_hat(t)
    ks = np.arange(1, eng.kmax + 1, dtype=float)
    pe = 2.0 * pe_modes @ np.cos(np.outer(ks, xs))

    ks_full = np.arange(1, nx // 2 + 1, dtype=float)
    sin_t = np.sin(np.outer(ks_full, xs))
    kprime = np.zeros((nt, nx))
    pos = t > 0
    for i in np.where(pos)[0]:
        damp = np.exp(-ks_full ** 2 * t[i])
        kprime[i] = -2.0 / L * (ks_full * damp) @ sin_t

    def flip(A):
        return A[::-1, :][:, np.r_[0, nx - 1:0:-1]]

    g_b = flip(kprime) * pe ** b        # K'(-z) Pe^b(z)
    g_a = (flip(kprime) if variant == 1 else kprime) * pe ** a
    pec = pe ** c

    ntt = 2 * nt - 1
    Af = np.fft.rfft2(pec, s=(ntt, nx))
    Bf = np.fft.rfft2(g_a, s=(ntt, nx))
    conv = np.fft.irfft2(Af * Bf, s=(ntt, nx)) * dt * dx
    lo = (ntt - nt) // 2
    h = conv[lo:lo + nt]                # h(z) = int Pe^c(z - w) g_a(w) dw
    value = float((g_b * h).sum() * dt * dx)
    return float(eps ** (l + m + n) * comb * value)
