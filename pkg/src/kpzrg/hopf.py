"""Coproducts, antipode, structure-group action and abstract derivative.

The positive-homogeneity algebra is the free commutative algebra on X0, X1
and the generators ``I_l(tau)`` / ``E^k_l(tau)``.  A monomial is a pair
``(xpow, gens)`` with ``xpow`` a multiindex and ``gens`` a sorted tuple of
generators; the empty monomial is the unit.

Vanishing conventions (the single cutoff convention used everywhere):

* ``I_l(tau) = 0`` when ``|tau| <= |l| - 2``,
* ``E^k_l(tau) = 0`` when ``|tau| <= |l| - k`` or ``|tau| > |l|``.

All linear combinations carry exact Fraction coefficients:

* ``TSum``  : dict (Symbol, Monomial) -> Fraction   (coproduct output)
* ``PSum``  : dict (Monomial, Monomial) -> Fraction (plus-coproduct output)
* ``LSum``  : dict Symbol -> Fraction
* ``MSum``  : dict Monomial -> Fraction
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Dict, Optional, Tuple

from .homogeneity import Homogeneity
from .symbols import (
    ONE,
    Symbol,
    _E_K,
    _I_K,
    _IP_K,
    _ONE_K,
    _POLY_K,
    _PROD_K,
    _XI_K,
    eps_power,
    integ,
    integ_prime,
    poly,
    prod,
)

_gen_intern: dict = {}


class TPlusGen:
    """Interned generator I_l(tau) or E^k_l(tau) of the plus algebra."""

    __slots__ = ("kind", "epow", "l", "arg", "_key", "_hom")

    def __new__(cls, kind: str, epow: int, l: Tuple[int, int], arg: Symbol):
        ident = (kind, epow, l, arg)
        cached = _gen_intern.get(ident)
        if cached is not None:
            return cached
        self = object.__new__(cls)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "epow", epow)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "arg", arg)
        object.__setattr__(self, "_key", (0 if kind == "I" else 1, epow, l) + arg.sort_key())
        object.__setattr__(self, "_hom", None)
        _gen_intern[ident] = self
        return self

    def __setattr__(self, name, value):
        raise AttributeError("TPlusGen is immutable")

    def sort_key(self):
        return self._key

    def __lt__(self, other):
        return self._key < other._key

    def homogeneity(self) -> Homogeneity:
        h = self._hom
        if h is None:
            shift = 2 if self.kind == "I" else self.epow
            h = self.arg.homogeneity() + Homogeneity(shift - 2 * self.l[0] - self.l[1])
            object.__setattr__(self, "_hom", h)
        return h

    def with_arg(self, arg: Symbol) -> Optional["TPlusGen"]:
        """Same label, different argument (None if killed by the cutoff)."""
        if self.kind == "I":
            return gen_I(self.l, arg)
        return gen_E(self.epow, self.l, arg)

    def __repr__(self):
        sup = "" if self.kind == "I" else f"^{self.epow}"
        return f"{self.kind}{sup}_{self.l}[{self.arg}]"


def gen_I(l: Tuple[int, int], tau: Symbol) -> Optional[TPlusGen]:
    """I_l(tau), or None when killed by the cutoff convention.

    Polynomial arguments vanish, matching I(X^k) = 0 on the symbol side;
    without this the comodule identity fails.
    """
    if tau.is_polynomial():
        return None
    labs = Homogeneity(2 * l[0] + l[1])
    if tau.homogeneity() <= labs - Homogeneity(2):
        return None
    return TPlusGen("I", 0, l, tau)


def gen_E(k: int, l: Tuple[int, int], tau: Symbol) -> Optional[TPlusGen]:
    """E^k_l(tau), or None when outside the homogeneity window."""
    labs = Homogeneity(2 * l[0] + l[1])
    h = tau.homogeneity()
    if h <= labs - Homogeneity(k) or h > labs:
        return None
    return TPlusGen("E", k, l, tau)


Monomial = Tuple[Tuple[int, int], Tuple[TPlusGen, ...]]
MONO_ONE: Monomial = ((0, 0), ())


def mono_from_gen(g: TPlusGen) -> Monomial:
    return ((0, 0), (g,))


def mono_xpow(k: Tuple[int, int]) -> Monomial:
    if k == (0, 0):
        return MONO_ONE
    return (k, ())


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if a == MONO_ONE:
        return b
    if b == MONO_ONE:
        return a
    gens = tuple(sorted(a[1] + b[1], key=TPlusGen.sort_key))
    return ((a[0][0] + b[0][0], a[0][1] + b[0][1]), gens)


def mono_hom(m: Monomial) -> Homogeneity:
    h = Homogeneity(2 * m[0][0] + m[0][1])
    for g in m[1]:
        h = h + g.homogeneity()
    return h


def counit(m: Monomial) -> Fraction:
    return Fraction(1) if m == MONO_ONE else Fraction(0)


def format_mono(m: Monomial) -> str:
    parts = []
    if m[0][0]:
        parts.append(f"X0^{m[0][0]}" if m[0][0] > 1 else "X0")
    if m[0][1]:
        parts.append(f"X1^{m[0][1]}" if m[0][1] > 1 else "X1")
    parts.extend(repr(g) for g in m[1])
    return "*".join(parts) if parts else "1"


# ---------------------------------------------------------------------------
# linear-combination helpers
# ---------------------------------------------------------------------------

def _acc(d: dict, key, coeff: Fraction):
    c = d.get(key)
    c = coeff if c is None else c + coeff
    if c == 0:
        d.pop(key, None)
    else:
        d[key] = c


def lsum_add(a: dict, b: dict, scale=Fraction(1)) -> dict:
    out = dict(a)
    for k, v in b.items():
        _acc(out, k, v * scale)
    return out


def sums_equal(a: dict, b: dict) -> bool:
    for k, v in a.items():
        if b.get(k, 0) != v:
            return False
    for k, v in b.items():
        if k not in a and v != 0:
            return False
    return True


_binom_cache: dict = {}


def _binom(n, k):
    key = (n, k)
    v = _binom_cache.get(key)
    if v is None:
        v = Fraction(factorial(n), factorial(k) * factorial(n - k))
        _binom_cache[key] = v
    return v


# ---------------------------------------------------------------------------
# the coproduct on symbols
# ---------------------------------------------------------------------------

_delta_cache: Dict[Symbol, dict] = {}


def coproduct(s: Symbol) -> Dict[Tuple[Symbol, Monomial], Fraction]:
    """Delta(s) as a TSum.

    One and Xi map to themselves tensor the unit, X_i is primitive, products
    multiply, and I / I' / E^j insert Taylor re-expansion terms indexed by
    plus-algebra generators; the vanishing conventions make every sum finite.
    """
    out = _delta_cache.get(s)
    if out is not None:
        return out

    if s.kind in (_ONE_K, _XI_K):
        out = {(s, MONO_ONE): Fraction(1)}
    elif s.kind == _POLY_K:
        k0, k1 = s.data
        out = {}
        for j0 in range(k0 + 1):
            for j1 in range(k1 + 1):
                c = _binom(k0, j0) * _binom(k1, j1)
                _acc(out, (poly(k0 - j0, k1 - j1), mono_xpow((j0, j1))), c)
    elif s.kind == _PROD_K:
        out = {(ONE, MONO_ONE): Fraction(1)}
        for f in s.factors:
            df = coproduct(f)
            nxt: dict = {}
            for (a1, m1), c1 in out.items():
                for (a2, m2), c2 in df.items():
                    p = prod([a1, a2])
                    if p is None:
                        continue
                    _acc(nxt, (p, mono_mul(m1, m2)), c1 * c2)
            out = nxt
    elif s.kind in (_I_K, _IP_K, _E_K):
        child = s.child
        if s.kind == _I_K:
            wrap = integ
            shift = (0, 0)
            mkgen = lambda lab: gen_I(lab, child)
            label_bound = child.homogeneity() + Homogeneity(2)
        elif s.kind == _IP_K:
            wrap = integ_prime
            shift = (0, 1)
            mkgen = lambda lab: gen_I(lab, child)
            label_bound = child.homogeneity() + Homogeneity(2)
        else:
            j = s.data
            wrap = lambda t, j=j: eps_power(j, t)
            shift = (0, 0)
            mkgen = lambda lab, j=j: gen_E(j, lab, child)
            label_bound = child.homogeneity() + Homogeneity(j)
        out = {}
        for (a, m), c in coproduct(child).items():
            w = wrap(a)
            if w is not None:
                _acc(out, (w, m), c)
        # sum over l, k of X^l/l! (x) X^k/k! gen_{l+k+shift}(child), grouped
        # by the total X-degree s = l + k
        for s0 in range(0, 8):
            if not (Homogeneity(2 * (s0 + shift[0])) < label_bound):
                break
            for s1 in range(0, 16):
                lab = (s0 + shift[0], s1 + shift[1])
                if not (Homogeneity(2 * lab[0] + lab[1]) < label_bound):
                    break
                g = mkgen(lab)
                if g is None:
                    continue
                for a0 in range(s0 + 1):
                    for a1 in range(s1 + 1):
                        c = Fraction(
                            1,
                            factorial(a0)
                            * factorial(a1)
                            * factorial(s0 - a0)
                            * factorial(s1 - a1),
                        )
                        right = mono_mul(mono_xpow((s0 - a0, s1 - a1)), mono_from_gen(g))
                        _acc(out, (poly(a0, a1), right), c)
    else:  # pragma: no cover
        raise AssertionError(s.kind)

    _delta_cache[s] = out
    return out


# ---------------------------------------------------------------------------
# the coproduct on the plus algebra
# ---------------------------------------------------------------------------

_delta_plus_cache: Dict[TPlusGen, dict] = {}


def coproduct_plus_gen(g: TPlusGen) -> Dict[Tuple[Monomial, Monomial], Fraction]:
    """Delta+ on a generator.

    Delta+ gen_l(tau) = sum_m (1/m!) (gen_{l+m} (x) (-X)^m) Delta(tau)
    + 1 (x) gen_l(tau).  The naive mirror of the symbol-side rule (with the
    X-monomials on the left) fails the comodule identity, which is the
    authority here; this form passes it, coassociativity and the antipode
    relation on every generated basis.
    """
    out = _delta_plus_cache.get(g)
    if out is not None:
        return out

    out = {(MONO_ONE, mono_from_gen(g)): Fraction(1)}
    shift2 = 2 if g.kind == "I" else g.epow
    dtau = coproduct(g.arg)
    for m0 in range(0, 8):
        if not (Homogeneity(2 * (g.l[0] + m0)) < g.arg.homogeneity() + Homogeneity(shift2)) and m0 > 0:
            break
        for m1 in range(0, 16):
            lab = (g.l[0] + m0, g.l[1] + m1)
            if m0 or m1:
                # gen_{lab} vanishes for all larger labels once |lab| passes
                # |arg| + shift; stop extending m1 then
                if not (Homogeneity(2 * lab[0] + lab[1]) < g.arg.homogeneity() + Homogeneity(shift2)):
                    break
            sign = Fraction((-1) ** (m0 + m1), factorial(m0) * factorial(m1))
            for (a, m), c in dtau.items():
                g2 = gen_I(lab, a) if g.kind == "I" else gen_E(g.epow, lab, a)
                if g2 is None:
                    continue
                right = mono_mul(m, mono_xpow((m0, m1)))
                _acc(out, (mono_from_gen(g2), right), c * sign)

    _delta_plus_cache[g] = out
    return out


def coproduct_plus(m: Monomial) -> Dict[Tuple[Monomial, Monomial], Fraction]:
    """Delta+ on a monomial (multiplicative; X_i primitive)."""
    out = {(MONO_ONE, MONO_ONE): Fraction(1)}
    k0, k1 = m[0]
    if k0 or k1:
        xout: dict = {}
        for j0 in range(k0 + 1):
            for j1 in range(k1 + 1):
                c = _binom(k0, j0) * _binom(k1, j1)
                _acc(xout, (mono_xpow((k0 - j0, k1 - j1)), mono_xpow((j0, j1))), c)
        out = _psum_mul(out, xout)
    for g in m[1]:
        out = _psum_mul(out, coproduct_plus_gen(g))
    return out


def _psum_mul(a: dict, b: dict) -> dict:
    if a == {(MONO_ONE, MONO_ONE): Fraction(1)}:
        return dict(b)
    out: dict = {}
    for (l1, r1), c1 in a.items():
        for (l2, r2), c2 in b.items():
            _acc(out, (mono_mul(l1, l2), mono_mul(r1, r2)), c1 * c2)
    return out


# ---------------------------------------------------------------------------
# antipode
# ---------------------------------------------------------------------------

_antipode_cache: Dict[TPlusGen, dict] = {}


class AntipodeRecursionError(RuntimeError):
    """Raised when the plus-coproduct of a generator is not triangular."""


def antipode_gen(g: TPlusGen, _depth=0) -> Dict[Monomial, Fraction]:
    """A(g) as an MSum, from M(A (x) id) Delta+ = unit * counit.

    A(g) = -sum over the non-(g (x) 1) terms (m1, m2) of A(m1) * m2; the
    recursion is well founded because every such m1 has homogeneity strictly
    below |g| (triangularity of Delta+).
    """
    out = _antipode_cache.get(g)
    if out is not None:
        return out
    if _depth > 200:
        raise AntipodeRecursionError(f"antipode recursion did not terminate at {g!r}")

    gh = g.homogeneity()
    out = {}
    for (m1, m2), c in coproduct_plus_gen(g).items():
        if m1 == mono_from_gen(g) and m2 == MONO_ONE:
            continue
        if not (mono_hom(m1) < gh):
            raise AntipodeRecursionError(
                f"Delta+ of {g!r} is not triangular: left factor {format_mono(m1)}"
            )
        for mm, cc in antipode_mono(m1, _depth + 1).items():
            _acc(out, mono_mul(mm, m2), -c * cc)
    _antipode_cache[g] = out
    return out


def antipode_mono(m: Monomial, _depth=0) -> Dict[Monomial, Fraction]:
    """Multiplicative extension with A(X_i) = -X_i."""
    sign = (-1) ** (m[0][0] + m[0][1])
    out = {mono_xpow(m[0]): Fraction(sign)}
    for g in m[1]:
        ag = antipode_gen(g, _depth)
        nxt: dict = {}
        for ma, ca in out.items():
            for mb, cb in ag.items():
                _acc(nxt, mono_mul(ma, mb), ca * cb)
        out = nxt
    return out


def antipode_check(g: TPlusGen) -> bool:
    """M(A (x) id) Delta+ g == counit(g) * 1."""
    acc: dict = {}
    for (m1, m2), c in coproduct_plus_gen(g).items():
        for mm, cc in antipode_mono(m1).items():
            _acc(acc, mono_mul(mm, m2), c * cc)
    return sums_equal(acc, {})


# ---------------------------------------------------------------------------
# structure group
# ---------------------------------------------------------------------------

class UnboundGeneratorError(KeyError):
    pass


class MultFunctional:
    """A multiplicative functional on the plus algebra.

    `values` maps generators to Fractions; `x0`, `x1` are the values on the
    polynomial generators.  `resolver`, when given, supplies values for
    generators missing from the table (used for star products).
    """

    def __init__(self, values: Dict[TPlusGen, Fraction] | None = None,
                 x0=Fraction(0), x1=Fraction(0), resolver=None, name=""):
        self.values = dict(values or {})
        self.x0 = Fraction(x0)
        self.x1 = Fraction(x1)
        self.resolver = resolver
        self.name = name

    def on_gen(self, g: TPlusGen) -> Fraction:
        v = self.values.get(g)
        if v is None:
            if self.resolver is None:
                raise UnboundGeneratorError(
                    f"functional {self.name or '<anon>'} has no value on {g!r}"
                )
            v = self.resolver(g)
            self.values[g] = v
        return v

    def __call__(self, m: Monomial) -> Fraction:
        v = self.x0 ** m[0][0] * self.x1 ** m[0][1]
        for g in m[1]:
            v *= self.on_gen(g)
        return v

    def star(self, other: "MultFunctional") -> "MultFunctional":
        """Convolution (f * g)(sigma) = (f (x) g) Delta+ sigma."""

        def resolve(gen, f=self, h=other):
            total = Fraction(0)
            for (m1, m2), c in coproduct_plus_gen(gen).items():
                total += c * f(m1) * h(m2)
            return total

        return MultFunctional(
            {}, self.x0 + other.x0, self.x1 + other.x1, resolver=resolve,
            name=f"({self.name})*({other.name})",
        )


def gamma_apply(f: MultFunctional, s: Symbol) -> Dict[Symbol, Fraction]:
    """Gamma_f s = (id (x) f) Delta s, as an LSum."""
    out: dict = {}
    for (a, m), c in coproduct(s).items():
        v = f(m)
        if v != 0:
            _acc(out, a, c * v)
    return out


# ---------------------------------------------------------------------------
# abstract derivative
# ---------------------------------------------------------------------------

class DerivativeDomainError(ValueError):
    pass


def abstract_derivative(s: Symbol) -> Dict[Symbol, Fraction]:
    """D on the span of X^k * products of I(tau): Leibniz, D I = I', D X^k = k1 X^(k-e1)."""
    if s.kind == _ONE_K:
        return {}
    if s.kind == _POLY_K:
        k0, k1 = s.data
        if k1 == 0:
            return {}
        return {poly(k0, k1 - 1): Fraction(k1)}
    if s.kind == _I_K:
        return {integ_prime(s.child): Fraction(1)}
    if s.kind == _PROD_K:
        out: dict = {}
        fs = s.factors
        for i, f in enumerate(fs):
            df = abstract_derivative(f)
            rest = fs[:i] + fs[i + 1:]
            for t, c in df.items():
                p = prod(rest + (t,))
                if p is not None:
                    _acc(out, p, c)
        return out
    raise DerivativeDomainError(f"{s} is outside the domain of the abstract derivative")


def derivative_on_sum(ls: Dict[Symbol, Fraction]) -> Dict[Symbol, Fraction]:
    out: dict = {}
    for t, c in ls.items():
        for u, d in abstract_derivative(t).items():
            _acc(out, u, c * d)
    return out


# ---------------------------------------------------------------------------
# identity checks used by tests and the CLI
# ---------------------------------------------------------------------------

def comodule_check(s: Symbol) -> bool:
    """(Delta (x) id) Delta s == (id (x) Delta+) Delta s."""
    lhs: dict = {}
    rhs: dict = {}
    for (a, m), c in coproduct(s).items():
        for (a2, m2), c2 in coproduct(a).items():
            _acc(lhs, (a2, m2, m), c * c2)
        for (m1, m2), c2 in coproduct_plus(m).items():
            _acc(rhs, (a, m1, m2), c * c2)
    return sums_equal(lhs, rhs)


def coassociativity_plus_check(g: TPlusGen) -> bool:
    """(Delta+ (x) id) Delta+ == (id (x) Delta+) Delta+ on a generator."""
    lhs: dict = {}
    rhs: dict = {}
    for (m1, m2), c in coproduct_plus_gen(g).items():
        for (a, b), c2 in coproduct_plus(m1).items():
            _acc(lhs, (a, b, m2), c * c2)
        for (a, b), c2 in coproduct_plus(m2).items():
            _acc(rhs, (m1, a, b), c * c2)
    return sums_equal(lhs, rhs)


def triangularity_check(s: Symbol) -> bool:
    """Every non-leading left leg of Delta s sits strictly below |s|."""
    h = s.homogeneity()
    for (a, m), c in coproduct(s).items():
        if a is s and m == MONO_ONE:
            continue
        if not (a.homogeneity() < h):
            return False
    return True


def derivative_compat_check(s: Symbol) -> bool:
    """Delta D s == (D (x) id) Delta s on the derivative's domain."""
    lhs: dict = {}
    for t, c in abstract_derivative(s).items():
        for (a, m), c2 in coproduct(t).items():
            _acc(lhs, (a, m), c * c2)
    rhs: dict = {}
    for (a, m), c in coproduct(s).items():
        try:
            da = abstract_derivative(a)
        except DerivativeDomainError:
            return False
        for t, c2 in da.items():
            _acc(rhs, (t, m), c * c2)
    return sums_equal(lhs, rhs)
