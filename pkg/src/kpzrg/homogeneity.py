"""Exact homogeneity arithmetic in the ring Q + Q*kappa.

Every scaling degree in this package is a number ``q + k*kappa`` where
``kappa`` is an unspecified, arbitrarily small positive constant.  Comparing
two such numbers lexicographically on ``(q, k)`` gives the order they would
have for every sufficiently small ``kappa > 0``, which removes all
floating-point ties from cutoff and triangularity checks.
"""

from __future__ import annotations

from fractions import Fraction
from functools import total_ordering
from typing import Union

QLike = Union[int, str, Fraction]


def _frac(x: QLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


@total_ordering
class Homogeneity:
    """An element ``q + k*kappa`` of Q + Q*kappa, ordered lexicographically.

    ``q`` and ``k`` are exact rationals.  Symbol homogeneities only ever use
    integer ``k`` (each noise letter contributes ``-kappa``), but graph edge
    labels such as ``2 + kappa/2`` need rational kappa coefficients, so the
    field is a Fraction throughout.
    """

    __slots__ = ("q", "k")

    def __init__(self, q: QLike = 0, k: QLike = 0):
        object.__setattr__(self, "q", _frac(q))
        object.__setattr__(self, "k", _frac(k))

    def __setattr__(self, name, value):
        raise AttributeError("Homogeneity is immutable")

    def __add__(self, other: "Homogeneity") -> "Homogeneity":
        other = as_hom(other)
        return Homogeneity(self.q + other.q, self.k + other.k)

    __radd__ = __add__

    def __sub__(self, other: "Homogeneity") -> "Homogeneity":
        other = as_hom(other)
        return Homogeneity(self.q - other.q, self.k - other.k)

    def __rsub__(self, other) -> "Homogeneity":
        return as_hom(other) - self

    def __neg__(self) -> "Homogeneity":
        return Homogeneity(-self.q, -self.k)

    def __mul__(self, n) -> "Homogeneity":
        if isinstance(n, Homogeneity):
            raise TypeError("cannot multiply two homogeneities")
        n = _frac(n)
        return Homogeneity(self.q * n, self.k * n)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Homogeneity(other)
        if not isinstance(other, Homogeneity):
            return NotImplemented
        return self.q == other.q and self.k == other.k

    def __lt__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Homogeneity(other)
        if not isinstance(other, Homogeneity):
            return NotImplemented
        return (self.q, self.k) < (other.q, other.k)

    def __hash__(self) -> int:
        return hash((self.q, self.k))

    def __float__(self) -> float:
        # kappa pinned to a tiny positive value; only for reporting/plots.
        return float(self.q) + 1e-9 * float(self.k)

    def numeric(self, kappa: float) -> float:
        """Value at a concrete ``kappa``."""
        return float(self.q) + kappa * float(self.k)

    def __repr__(self) -> str:
        return f"Homogeneity({self.q!r}, {self.k!r})"

    def __str__(self) -> str:
        if self.k == 0:
            return str(self.q)
        if self.k == 1:
            ktxt = "k"
        elif self.k == -1:
            ktxt = "-k"
        else:
            ktxt = f"{self.k}k"
        if self.q == 0:
            return ktxt
        sign = "+" if self.k > 0 else ""
        return f"{self.q}{sign}{ktxt}"

    def to_json(self) -> dict:
        return {"q": str(self.q), "kappa": str(self.k)}


def as_hom(x) -> Homogeneity:
    """Coerce ints/Fractions (pure-q values) to Homogeneity."""
    if isinstance(x, Homogeneity):
        return x
    if isinstance(x, (int, Fraction)):
        return Homogeneity(x)
    raise TypeError(f"cannot interpret {x!r} as a homogeneity")


ZERO = Homogeneity(0)
# Scaling degree of the noise letter: -3/2 - kappa.
XI_HOM = Homogeneity(Fraction(-3, 2), -1)
