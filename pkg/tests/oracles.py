"""Independent oracles used to pin expected values before testing the library.

These deliberately re-derive results through a different mechanism than the
library (round-by-round closure instead of worklist fixpoint, naive
enumeration instead of DP, quadrature instead of algebra) so that a test
comparing the two is a genuine cross-check.
"""

from fractions import Fraction
from itertools import combinations_with_replacement

from kpzrg.homogeneity import Homogeneity
from kpzrg.symbols import ONE, XI, eps_power, integ, integ_prime, poly, prod


def closure_by_rounds(m, cutoff, rounds=10, slack=Fraction(1)):
    """Round-by-round closure of the symbol formation rules.

    Each round applies every rule once to the previous sets.  Internally keeps
    all symbols with q-part <= cutoff.q + slack: a factor of a product with
    |product| <= cutoff satisfies q_factor <= cutoff.q + 1/2, because the
    other 2k-1 factors have q >= -1/2 each and E^(k-1) contributes k-1, so any
    slack >= 1/2 loses nothing.  Raises if the cutoff-filtered sets did not
    stabilise within `rounds`, which bounds the recursion depth explicitly.
    """
    qbound = cutoff.q + slack
    polys = []
    k0 = 0
    while 2 * k0 <= qbound:
        k1 = 0
        while 2 * k0 + k1 <= qbound:
            polys.append(poly(k0, k1))
            k1 += 1
        k0 += 1

    up = set(polys)
    v = {XI} | set(polys)
    u = set(polys)
    history = []
    for _ in range(rounds):
        up_next = set(up)
        v_next = set(v)
        u_next = set(u)
        for tau in v:
            if tau.is_polynomial():
                continue
            s = integ_prime(tau)
            if s is not None and s.homogeneity().q <= qbound:
                up_next.add(s)
            s = integ(tau)
            if s is not None and s.homogeneity().q <= qbound:
                u_next.add(s)
        facs = sorted(up, key=lambda t: t.sort_key())
        for k in range(1, m + 1):
            for combo in combinations_with_replacement(facs, 2 * k):
                s = eps_power(k - 1, prod(combo))
                if s is None or s.is_polynomial():
                    continue
                if s.homogeneity().q <= qbound:
                    v_next.add(s)
        stable = up_next == up and v_next == v and u_next == u
        up, v, u = up_next, v_next, u_next
        history.append(stable)
        if stable:
            filt = lambda xs: frozenset(x for x in xs if x.homogeneity() <= cutoff)
            return filt(u), filt(up), filt(v)
    raise AssertionError("oracle closure did not stabilise within the depth bound")


def naive_tree_sum(eta, parents, nu_star, lam, cap):
    """I_lambda(eta) by literal enumeration of order-preserving labellings.

    `parents[i]` is the parent index of inner node i (root has parent -1);
    labels are nondecreasing from parent to child, capped at `cap`, with
    2^(-l[nu_star]) <= lam.
    """
    import math

    n = len(eta)
    order = sorted(range(n), key=lambda i: _depth(parents, i))
    lmin_star = max(0, math.ceil(-math.log2(lam)))
    total = 0.0

    def rec(idx, labels):
        nonlocal total
        if idx == n:
            term = 1.0
            for i in range(n):
                term *= 2.0 ** (-labels[i] * eta[i])
            total += term
            return
        node = order[idx]
        lo = labels[parents[node]] if parents[node] >= 0 else 0
        if node == nu_star:
            lo = max(lo, lmin_star)
        for lab in range(lo, cap + 1):
            labels[node] = lab
            rec(idx + 1, labels)
        labels[node] = -1

    rec(0, [-1] * n)
    return total


def _depth(parents, i):
    d = 0
    while parents[i] >= 0:
        i = parents[i]
        d += 1
    return d


def gaussian_moment(n, var: Fraction) -> Fraction:
    """E x^n under N(0, var), exactly: (n-1)!! var^(n/2) for even n."""
    if n % 2 == 1:
        return Fraction(0)
    out = Fraction(1)
    k = n
    while k > 1:
        out *= k - 1
        k -= 2
    return out * var ** (n // 2)


def hermite_poly_coeffs(n, c: Fraction):
    """Coefficients (ascending) of the generalised Hermite polynomial.

    H_0 = 1, H_1 = x, H_{j+1} = x H_j - j c H_{j-1}.
    """
    hm, h = [Fraction(1)], [Fraction(0), Fraction(1)]
    if n == 0:
        return hm
    for j in range(1, n):
        nxt = [Fraction(0)] + h
        for i, a in enumerate(hm):
            nxt[i] -= j * c * a
        hm, h = h, nxt
    return h


def pairing_count(legs_a, legs_b, legs_c):
    """Perfect matchings of three leg groups with no intra-group pair.

    Brute force over matchings; groups are lists of distinct leg ids.
    """
    legs = [(0, i) for i in range(legs_a)] + [(1, i) for i in range(legs_b)] + [
        (2, i) for i in range(legs_c)
    ]

    def rec(remaining):
        if not remaining:
            return 1
        first = remaining[0]
        rest = remaining[1:]
        total = 0
        for j, other in enumerate(rest):
            if other[0] == first[0]:
                continue
            total += rec(rest[:j] + rest[j + 1:])
        return total

    return rec(legs)
