"""Hot numeric kernels, in numba and numpy variants.

The mode-space constant evaluations smear small time-quadrature tables
against exact exponentials for every (output time, wavenumber) pair; that
triple loop dominates the constants pipeline and is the main accelerated
kernel.  The polynomial evaluator is the per-step nonlinearity of the growth
solver.  `USE_NUMBA` (see accel.py) picks the implementation; both paths are
kept in sync by the test suite and timed against each other by
benchmarks/bench_accel.py.
"""

from __future__ import annotations

import numpy as np

from .accel import USE_NUMBA, njit

__all__ = ["exp_smear", "polyval_lattice", "tree_label_sum_arrays"]


# mode 0: plain exponential smear          sum_j w_j T_jk exp(-k^2 |t - tau_j|)
# mode 1: one-sided Laplace tail weight    ... * (1/(2 k^2) + max(tau_j - t, 0))
# mode 2: causal smear                     ... * 1_{tau_j <= t}


def _exp_smear_numpy(tgrid, taugrid, table, k2, mode, chunk=64):
    nt = tgrid.shape[0]
    nk = k2.shape[0]
    out = np.zeros((nt, nk))
    for lo in range(0, nt, chunk):
        hi = min(lo + chunk, nt)
        dtau = tgrid[lo:hi, None, None] - taugrid[None, :, None]
        ker = np.exp(-k2[None, None, :] * np.abs(dtau))
        if mode == 1:
            ker = ker * (1.0 / (2.0 * k2[None, None, :]) + np.maximum(-dtau, 0.0))
        elif mode == 2:
            ker = ker * (dtau >= 0)
        out[lo:hi] = np.einsum("tjk,jk->tk", ker, table)
    return out


if USE_NUMBA:

    @njit(cache=True)
    def _exp_smear_numba(tgrid, taugrid, table, k2, mode):  # pragma: no cover
        nt = tgrid.shape[0]
        nj = taugrid.shape[0]
        nk = k2.shape[0]
        out = np.zeros((nt, nk))
        for ti in range(nt):
            t = tgrid[ti]
            for j in range(nj):
                d = t - taugrid[j]
                ad = abs(d)
                for ki in range(nk):
                    v = np.exp(-k2[ki] * ad) * table[j, ki]
                    if mode == 1:
                        extra = 1.0 / (2.0 * k2[ki])
                        if d < 0.0:
                            extra += -d
                        v *= extra
                    elif mode == 2:
                        if d < 0.0:
                            v = 0.0
                    out[ti, ki] += v
        return out


def exp_smear(tgrid, taugrid, table, k2, mode=0):
    """sum_j table[j,k] * exp(-k2[k] |t_i - tau_j|) with optional weights.

    `table` already contains the quadrature weights.  k2 entries must be
    positive for mode 1.
    """
    tgrid = np.ascontiguousarray(tgrid, dtype=np.float64)
    taugrid = np.ascontiguousarray(taugrid, dtype=np.float64)
    table = np.ascontiguousarray(table, dtype=np.float64)
    k2 = np.ascontiguousarray(k2, dtype=np.float64)
    if USE_NUMBA:
        return _exp_smear_numba(tgrid, taugrid, table, k2, mode)
    return _exp_smear_numpy(tgrid, taugrid, table, k2, mode)


def _polyval_numpy(u, coeffs):
    out = np.full_like(u, coeffs[-1])
    for c in coeffs[-2::-1]:
        out = out * u + c
    return out


if USE_NUMBA:

    @njit(cache=True)
    def _polyval_numba(u, coeffs):  # pragma: no cover
        n = u.shape[0]
        m = coeffs.shape[0]
        out = np.empty(n)
        for i in range(n):
            acc = coeffs[m - 1]
            x = u[i]
            for j in range(m - 2, -1, -1):
                acc = acc * x + coeffs[j]
            out[i] = acc
        return out


def polyval_lattice(u, coeffs):
    """Horner evaluation of an ascending-coefficient polynomial on a lattice."""
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    if USE_NUMBA:
        return _polyval_numba(u.ravel(), coeffs).reshape(u.shape)
    return _polyval_numpy(u, coeffs)


def _tree_label_sum_numpy(parents, order, eta, star, lmin_star, cap):
    n = parents.shape[0]
    rows = np.zeros((n, cap + 2))
    for v in order:
        lo0 = lmin_star if v == star else 0
        acc = 0.0
        for lv in range(cap, -1, -1):
            if lv >= lo0:
                term = 2.0 ** (-lv * eta[v])
                for u in range(n):
                    if parents[u] == v:
                        term *= rows[u, lv]
                acc += term
            rows[v, lv] = acc
    root = int(np.where(parents < 0)[0][0])
    return rows[root, 0]


if USE_NUMBA:

    @njit(cache=True)
    def _tree_label_sum_numba(parents, order, eta, star, lmin_star, cap):  # pragma: no cover
        n = parents.shape[0]
        rows = np.zeros((n, cap + 2))
        for oi in range(n):
            v = order[oi]
            lo0 = lmin_star if v == star else 0
            acc = 0.0
            for lv in range(cap, -1, -1):
                if lv >= lo0:
                    term = 2.0 ** (-lv * eta[v])
                    for u in range(n):
                        if parents[u] == v:
                            term *= rows[u, lv]
                    acc += term
                rows[v, lv] = acc
        root = 0
        for u in range(n):
            if parents[u] < 0:
                root = u
        return rows[root, 0]


def tree_label_sum_arrays(parents, eta, star, lmin_star, cap):
    """Capped sum over order-preserving labellings of prod 2^(-l_v eta_v)."""
    parents = np.ascontiguousarray(parents, dtype=np.int64)
    eta = np.ascontiguousarray(eta, dtype=np.float64)
    depth = np.zeros(len(parents), dtype=np.int64)
    for i in range(len(parents)):
        j, d = i, 0
        while parents[j] >= 0:
            j = parents[j]
            d += 1
        depth[i] = d
    order = np.argsort(-depth).astype(np.int64)
    if USE_NUMBA:
        return _tree_label_sum_numba(parents, order, eta, int(star), int(lmin_star), int(cap))
    return _tree_label_sum_numpy(parents, order, eta, int(star), int(lmin_star), int(cap))
