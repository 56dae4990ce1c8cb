"""Canonical tree symbols for the growth-model regularity structure.

A symbol is one of

* ``One`` (the empty product),
* ``Xi`` (the noise letter),
* ``X^(k0,k1)`` (parabolic monomials; time degree counts double),
* ``I(tau)`` / ``I'(tau)`` (integration against the heat kernel / its
  spatial derivative),
* ``E^j(tau)`` (the bookkeeping letter for a factor of the small parameter,
  raising homogeneity by ``j``),
* finite commutative products of the above.

Canonical form: products are flattened and sorted by a fixed structural
order, never contain ``One`` or nested products, and a product with a single
factor is that factor; ``E^j(E^l(tau))`` collapses to ``E^(j+l)(tau)`` and
``E^0(tau)`` is ``tau``; ``I``/``I'`` of a pure polynomial is the zero
element of the span (represented as ``None`` by the smart constructors).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional

from .homogeneity import Homogeneity, XI_HOM

_ONE_K, _XI_K, _POLY_K, _I_K, _IP_K, _E_K, _PROD_K = range(7)

_intern: dict = {}


class Symbol:
    """Immutable canonical symbol. Use the module-level constructors."""

    __slots__ = ("kind", "data", "child", "factors", "_key", "_hom", "_str")

    def __new__(cls, kind, data=None, child=None, factors=None):
        ident = (kind, data, child, factors)
        cached = _intern.get(ident)
        if cached is not None:
            return cached
        self = object.__new__(cls)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "child", child)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "_key", None)
        object.__setattr__(self, "_hom", None)
        object.__setattr__(self, "_str", None)
        _intern[ident] = self
        return self

    def __setattr__(self, name, value):
        raise AttributeError("Symbol is immutable")

    # interning makes identity equality valid
    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def sort_key(self) -> tuple:
        """Flat integer tuple giving a total structural order."""
        k = self._key
        if k is None:
            if self.kind == _POLY_K:
                k = (_POLY_K, self.data[0], self.data[1])
            elif self.kind in (_I_K, _IP_K):
                k = (self.kind,) + self.child.sort_key()
            elif self.kind == _E_K:
                k = (_E_K, self.data) + self.child.sort_key()
            elif self.kind == _PROD_K:
                k = (_PROD_K, len(self.factors))
                for f in self.factors:
                    k = k + f.sort_key()
            else:
                k = (self.kind,)
            object.__setattr__(self, "_key", k)
        return k

    def homogeneity(self) -> Homogeneity:
        h = self._hom
        if h is None:
            h = _hom_of(self)
            object.__setattr__(self, "_hom", h)
        return h

    def is_polynomial(self) -> bool:
        """True for One and the X^k (the sector killed by I and I')."""
        return self.kind in (_ONE_K, _POLY_K)

    def prod_factors(self) -> tuple:
        """The factor tuple of this symbol viewed as a product."""
        if self.kind == _PROD_K:
            return self.factors
        if self.kind == _ONE_K:
            return ()
        return (self,)

    def __repr__(self):
        return f"<{format_symbol(self)}>"

    def __str__(self):
        return format_symbol(self)


ONE = Symbol(_ONE_K)
XI = Symbol(_XI_K)


def poly(k0: int, k1: int) -> Symbol:
    if k0 < 0 or k1 < 0:
        raise ValueError("polynomial multiindex must be nonnegative")
    if k0 == 0 and k1 == 0:
        return ONE
    return Symbol(_POLY_K, (k0, k1))


X0 = poly(1, 0)
X1 = poly(0, 1)


def integ(tau: Optional[Symbol]) -> Optional[Symbol]:
    """I(tau); None (zero) on polynomials and on zero input."""
    if tau is None or tau.is_polynomial():
        return None
    return Symbol(_I_K, child=tau)


def integ_prime(tau: Optional[Symbol]) -> Optional[Symbol]:
    """I'(tau); None (zero) on polynomials and on zero input."""
    if tau is None or tau.is_polynomial():
        return None
    return Symbol(_IP_K, child=tau)


def eps_power(j: int, tau: Optional[Symbol]) -> Optional[Symbol]:
    """E^j(tau), collapsing nested E's and eliding E^0."""
    if tau is None:
        return None
    if j < 0:
        raise ValueError("E power must be nonnegative")
    if tau.kind == _E_K:
        j, tau = j + tau.data, tau.child
    if j == 0:
        return tau
    return Symbol(_E_K, j, child=tau)


def prod(factors: Iterable[Optional[Symbol]]) -> Optional[Symbol]:
    """Commutative product, flattened, sorted, One-free; None if any factor is zero."""
    flat = []
    for f in factors:
        if f is None:
            return None
        if f.kind == _ONE_K:
            continue
        if f.kind == _PROD_K:
            flat.extend(f.factors)
        else:
            flat.append(f)
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=Symbol.sort_key)
    return Symbol(_PROD_K, factors=tuple(flat))


PSI = integ_prime(XI)


def _hom_of(s: Symbol) -> Homogeneity:
    if s.kind == _ONE_K:
        return Homogeneity(0)
    if s.kind == _XI_K:
        return XI_HOM
    if s.kind == _POLY_K:
        return Homogeneity(2 * s.data[0] + s.data[1])
    if s.kind == _I_K:
        return s.child.homogeneity() + Homogeneity(2)
    if s.kind == _IP_K:
        return s.child.homogeneity() + Homogeneity(1)
    if s.kind == _E_K:
        return s.child.homogeneity() + Homogeneity(s.data)
    h = Homogeneity(0)
    for f in s.factors:
        h = h + f.homogeneity()
    return h


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _atom_str(s: Symbol) -> str:
    if s.kind == _ONE_K:
        return "One"
    if s.kind == _XI_K:
        return "Xi"
    if s.kind == _POLY_K:
        k0, k1 = s.data
        if (k0, k1) == (1, 0):
            return "X0"
        if (k0, k1) == (0, 1):
            return "X1"
        return f"X^({k0},{k1})"
    if s.kind == _I_K:
        return f"I({format_symbol(s.child)})"
    if s.kind == _IP_K:
        return f"I'({format_symbol(s.child)})"
    if s.kind == _E_K:
        return f"E^{s.data}({format_symbol(s.child)})"
    raise AssertionError


def format_symbol(s: Symbol) -> str:
    """Canonical text form; parse_symbol(format_symbol(s)) == s."""
    if s._str is not None:
        return s._str
    if s.kind != _PROD_K:
        out = _atom_str(s)
    else:
        parts = []
        i = 0
        fs = s.factors
        while i < len(fs):
            j = i
            while j < len(fs) and fs[j] is fs[i]:
                j += 1
            base = _atom_str(fs[i])
            parts.append(base if j - i == 1 else f"{base}^{j - i}")
            i = j
        out = "*".join(parts)
    object.__setattr__(s, "_str", out)
    return out


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

class SymbolParseError(ValueError):
    """Syntax or semantic error, with 0-based position into the input."""

    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} (at position {pos})")
        self.pos = pos


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def error(self, msg):
        raise SymbolParseError(msg, self.i)

    def skip_ws(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.i] if self.i < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.i += 1

    def integer(self):
        self.skip_ws()
        j = self.i
        if self.i < len(self.text) and self.text[self.i] in "+-":
            self.i += 1
        while self.i < len(self.text) and self.text[self.i].isdigit():
            self.i += 1
        if self.i == j or not self.text[j:self.i].lstrip("+-"):
            self.error("expected an integer")
        return int(self.text[j:self.i])

    def product(self) -> Optional[Symbol]:
        factors = [self.power()]
        while True:
            c = self.peek()
            if c == "*":
                self.i += 1
                factors.append(self.power())
            elif c and (c.isalpha() or c == "("):
                if c == "(":
                    self.error("unexpected '('")
                factors.append(self.power())
            else:
                break
        return prod(factors)

    def power(self) -> Optional[Symbol]:
        at = self.i
        base = self.atom()
        if self.peek() == "^":
            self.i += 1
            n = self.integer()
            if n < 0:
                self.i = at
                self.error("negative power")
            base = prod([base] * n)
        return base

    def atom(self) -> Optional[Symbol]:
        self.skip_ws()
        at = self.i
        t = self.text
        if t.startswith("Xi", at):
            self.i += 2
            return XI
        if t.startswith("One", at):
            self.i += 3
            return ONE
        if t.startswith("X0", at):
            self.i += 2
            return X0
        if t.startswith("X1", at):
            self.i += 2
            return X1
        if t.startswith("X^(", at):
            self.i += 3
            k0 = self.integer()
            self.expect(",")
            k1 = self.integer()
            self.expect(")")
            if k0 < 0 or k1 < 0:
                self.i = at
                self.error("negative multiindex")
            return poly(k0, k1)
        if t.startswith("I'", at):
            self.i += 2
            self.expect("(")
            arg = self.product()
            self.expect(")")
            out = integ_prime(arg)
            if out is None:
                self.i = at
                self.error("I' of a polynomial is the zero element")
            return out
        if t.startswith("I", at):
            self.i += 1
            self.expect("(")
            arg = self.product()
            self.expect(")")
            out = integ(arg)
            if out is None:
                self.i = at
                self.error("I of a polynomial is the zero element")
            return out
        if t.startswith("E^", at):
            self.i += 2
            j = self.integer()
            if j < 0:
                self.i = at
                self.error("negative E power")
            self.expect("(")
            arg = self.product()
            self.expect(")")
            return eps_power(j, arg)
        self.error("expected a symbol atom")


def parse_symbol(text: str) -> Symbol:
    """Parse the canonical grammar; raises SymbolParseError with position."""
    p = _Parser(text)
    out = p.product()
    p.skip_ws()
    if p.i != len(text):
        p.error("trailing input")
    if out is None:
        raise SymbolParseError("expression is the zero element", 0)
    return out


# ---------------------------------------------------------------------------
# basis generation
# ---------------------------------------------------------------------------

class SymbolBasis:
    """The symbol sets of a truncated structure, plus their trimmed variants.

    ``w``, ``u``, ``uprime``, ``v`` are the closure sets intersected with
    ``{|tau| <= cutoff}``.  ``ubar_prime``, ``vbar``, ``wbar``, ``uprime_ex``
    and ``tplus_generators`` hold the trimmed data; they are filled by
    :func:`trim_basis` (``generate_basis`` calls it).
    """

    def __init__(self, m: int, cutoff: Homogeneity):
        self.m = m
        self.cutoff = cutoff
        self.u: list = []
        self.uprime: list = []
        self.v: list = []
        self.w: list = []
        self.ubar_prime: list = []
        self.vbar: list = []
        self.wbar: list = []
        self.uprime_ex: list = []
        self.tplus_generators: list = []

    def sorted_(self, syms) -> list:
        return sorted(set(syms), key=lambda s: (s.homogeneity().q, s.homogeneity().k) + s.sort_key())


def _polys_upto(qmax: Fraction) -> list:
    out = []
    k0 = 0
    while 2 * k0 <= qmax:
        k1 = 0
        while 2 * k0 + k1 <= qmax:
            out.append(poly(k0, k1))
            k1 += 1
        k0 += 1
    return out


def _products_bounded(factors: list, count: int, bound: Homogeneity):
    """Multisets of exactly `count` factors with homogeneity sum <= bound.

    Factors must be sorted by ascending homogeneity; recursion prunes on the
    smallest completion.
    """
    out = []
    homs = [f.homogeneity() for f in factors]

    def rec(start, left, acc, chosen):
        if left == 0:
            out.append(tuple(chosen))
            return
        for i in range(start, len(factors)):
            h = acc + homs[i]
            # remaining slots filled with the cheapest available factor
            if not (h + homs[i] * (left - 1) <= bound):
                break
            chosen.append(factors[i])
            rec(i, left - 1, h, chosen)
            chosen.pop()

    rec(0, count, Homogeneity(0), [])
    return out


def generate_basis(m: int, cutoff: Homogeneity) -> SymbolBasis:
    """Smallest sets U, U', V closed under the formation rules, cut at `cutoff`.

    The closure rules: Xi and the polynomials seed V and U/U'; products of
    2k elements of U' wrapped in E^(k-1) (k = 1..m, with E^0 elided) land in
    V; I(tau) and I'(tau) of V-elements land in U and U'.  Internally the
    sets are tracked slightly above the cutoff (by q + 1/2) because a product
    below the cutoff may use one factor above it; every U' element of a
    product with |product| <= cutoff satisfies q <= cutoff.q + 1/2 since all
    other factors have q >= -1/2.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if cutoff.q > 2:
        raise ValueError(
            "cutoff.q > 2 not supported: termination of the closure is only "
            "guaranteed for cutoffs up to homogeneity 2"
        )

    uq = cutoff.q + Fraction(1, 2)  # internal U' grade bound
    vq = cutoff.q                    # internal V grade bound

    up_int = {p for p in _polys_upto(uq)}
    v_int = {XI} | {p for p in _polys_upto(vq)}

    for _round in range(1000):
        changed = False
        # integration: V -> U'
        for tau in list(v_int):
            if tau.is_polynomial():
                continue
            s = integ_prime(tau)
            if s is not None and s.homogeneity().q <= uq and s not in up_int:
                up_int.add(s)
                changed = True
        # products: U'^(2k) -> E^(k-1)(...) -> V
        facs = sorted(up_int, key=lambda s: (s.homogeneity().q, s.homogeneity().k) + s.sort_key())
        for k in range(1, m + 1):
            target = Homogeneity(vq - (k - 1))
            for combo in _products_bounded(facs, 2 * k, target):
                s = eps_power(k - 1, prod(combo))
                if s is not None and not s.is_polynomial() and s.homogeneity().q <= vq and s not in v_int:
                    v_int.add(s)
                    changed = True
        if not changed:
            break
        if len(up_int) + len(v_int) > 200_000:
            raise RuntimeError("basis closure exceeded the safety cap")
    else:
        raise RuntimeError("basis closure did not stabilise")

    basis = SymbolBasis(m, cutoff)
    basis.uprime = basis.sorted_(s for s in up_int if s.homogeneity() <= cutoff)
    basis.v = basis.sorted_(s for s in v_int if s.homogeneity() <= cutoff)
    u = {p for p in _polys_upto(cutoff.q) if p.homogeneity() <= cutoff}
    for tau in v_int:
        s = integ(tau)
        if s is not None and s.homogeneity() <= cutoff:
            u.add(s)
    basis.u = basis.sorted_(u)
    basis.w = basis.sorted_(set(basis.u) | set(basis.uprime) | set(basis.v))
    basis._up_internal = basis.sorted_(up_int)  # kept for trimming
    basis._v_internal = basis.sorted_(v_int)
    trim_basis(basis)
    return basis


def vbar_elements(ubar_prime: list, m: int) -> list:
    """E^(k-1) products of 2k trimmed-U' factors with factor-sum <= 0.

    The noise letter is kept as well: the integrated noise I(Xi) is the
    leading component of every solution expansion, so dropping Xi here would
    leave the U-sector without it.
    """
    out = {XI}
    facs = sorted(ubar_prime, key=lambda s: (s.homogeneity().q, s.homogeneity().k) + s.sort_key())
    for k in range(1, m + 1):
        for combo in _products_bounded(facs, 2 * k, Homogeneity(0)):
            s = eps_power(k - 1, prod(combo))
            if s is not None:
                out.add(s)
    return out


def trim_basis(basis: SymbolBasis) -> SymbolBasis:
    """Populate the trimmed sets and the T+ generator list of `basis`."""
    m = basis.m
    three_quarters = Homogeneity(Fraction(3, 4))
    basis.ubar_prime = basis.sorted_(
        s for s in basis._up_internal if s.homogeneity() < three_quarters
    )
    basis.vbar = basis.sorted_(vbar_elements(basis.ubar_prime, m))
    wbar = set(basis.ubar_prime) | set(basis.vbar)
    for tau in basis.vbar:
        s = integ(tau)
        if s is not None:
            wbar.add(s)
    basis.wbar = basis.sorted_(wbar)
    basis.uprime_ex = basis.sorted_(
        prod(c) for c in _products_bounded(basis.ubar_prime, 2 * m, Homogeneity(100))
    )

    # T+ generators over the trimmed sets.  I_l(tau) for tau with I(tau) in
    # Wbar and |tau| + 2 > |l|; E^k_l(tau) for tau in U'_ex meeting the
    # V_{l,k} window |l| >= sum|tau_i| > |l| - k.  A product of fewer than
    # 2k+2 non-trivial factors counts as padded with One.
    gens = [("X", (1, 0)), ("X", (0, 1))]
    for tau in basis.vbar:
        if tau.is_polynomial() or integ(tau) is None:
            continue
        bound = tau.homogeneity() + Homogeneity(2)
        for l0 in range(0, 3):
            for l1 in range(0, 6):
                if Homogeneity(2 * l0 + l1) < bound:
                    gens.append(("I", (l0, l1), tau))
    for tau in basis.uprime_ex:
        h = tau.homogeneity()
        for k in range(1, m):
            if len(tau.prod_factors()) > 2 * k + 2:
                continue
            for l0 in range(0, 3):
                for l1 in range(0, 6):
                    labs = Homogeneity(2 * l0 + l1)
                    if labs >= h and h > labs - Homogeneity(k):
                        gens.append(("E", k, (l0, l1), tau))
    basis.tplus_generators = gens
    return basis
