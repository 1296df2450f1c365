"""Exact rationals, outward-rounded dyadic intervals and certified constants.

Every inexact quantity in the package is an :class:`Interval` whose endpoints
are dyadic rationals (``m * 2**e``) rounded outward to ``prec`` significant
bits.  Rational scalars are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING, Union

if TYPE_CHECKING:
    from .qseries import CoeffPoly

Rational = Fraction

DEFAULT_PRECISION = 128
PRECISION_CEILING = 1024
EXP_ARG_LIMIT = 64

Number = Union[int, Fraction]


class OutOfRange(ValueError):
    pass


class NonPositiveInput(ValueError):
    pass


def _floor_dyadic(x: Fraction, prec: int) -> Fraction:
    n, d = x.numerator, x.denominator
    if n == 0:
        return x
    # mantissa keeps prec (+-1) significant bits
    shift = prec - (abs(n).bit_length() - d.bit_length())
    if shift >= 0:
        return Fraction((n << shift) // d, 1 << shift)
    return Fraction((n // (d << -shift)) << -shift)


def _ceil_dyadic(x: Fraction, prec: int) -> Fraction:
    return -_floor_dyadic(-x, prec)


def _as_fraction(x: Number) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` with dyadic endpoints.

    Arithmetic rounds the exact endpoint results outward to ``prec`` bits, so
    the result always contains the image of the operand intervals.
    """

    lo: Fraction
    hi: Fraction
    prec: int = DEFAULT_PRECISION

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def rounded(cls, lo: Number, hi: Number, prec: int) -> "Interval":
        return cls(_floor_dyadic(_as_fraction(lo), prec), _ceil_dyadic(_as_fraction(hi), prec), prec)

    @classmethod
    def point(cls, x: Number, prec: int = DEFAULT_PRECISION) -> "Interval":
        """Tightest enclosure of a rational; degenerate when ``x`` fits in ``prec`` bits."""
        x = _as_fraction(x)
        return cls.rounded(x, x, prec)

    def _coerce(self, other: Union["Interval", Number]) -> "Interval":
        if isinstance(other, Interval):
            return other
        return Interval.point(other, self.prec)

    def _p(self, other: "Interval") -> int:
        return max(self.prec, other.prec)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        return Interval.rounded(self.lo + o.lo, self.hi + o.hi, self._p(o))

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        return Interval.rounded(self.lo - o.hi, self.hi - o.lo, self._p(o))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Interval):
            c = _as_fraction(other)
            a, b = self.lo * c, self.hi * c
            if c < 0:
                a, b = b, a
            return Interval.rounded(a, b, self.prec)
        o = other
        if self.lo >= 0 and o.lo >= 0:
            return Interval.rounded(self.lo * o.lo, self.hi * o.hi, self._p(o))
        prods = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval.rounded(min(prods), max(prods), self._p(o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError(f"divisor {o} contains zero")
        inv = (1 / o.hi, 1 / o.lo)
        prods = (self.lo * inv[0], self.lo * inv[1], self.hi * inv[0], self.hi * inv[1])
        return Interval.rounded(min(prods), max(prods), self._p(o))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int) -> "Interval":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        if k == 0:
            return Interval(Fraction(1), Fraction(1), self.prec)
        if self.lo >= 0:
            return Interval.rounded(self.lo**k, self.hi**k, self.prec)
        if self.hi <= 0:
            a, b = self.hi**k, self.lo**k
            return Interval.rounded(min(a, b), max(a, b), self.prec)
        if k % 2:
            return Interval.rounded(self.lo**k, self.hi**k, self.prec)
        return Interval.rounded(0, max(self.lo**k, self.hi**k), self.prec)

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise NonPositiveInput(f"sqrt of {self}")
        return Interval(_sqrt_floor(self.lo, self.prec), _sqrt_ceil(self.hi, self.prec), self.prec)

    def exp(self) -> "Interval":
        return Interval(
            enclose_exp(self.lo, self.prec).lo, enclose_exp(self.hi, self.prec).hi, self.prec
        )

    def with_precision(self, prec: int) -> "Interval":
        return Interval.rounded(self.lo, self.hi, prec)

    # -- set queries ------------------------------------------------------
    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: Union["Interval", Number]) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    __contains__ = contains

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi), self._p(other))

    def widen(self, r: Number) -> "Interval":
        return Interval.rounded(self.lo - r, self.hi + r, self.prec)

    def is_positive(self) -> bool:
        return self.lo > 0

    def is_negative(self) -> bool:
        return self.hi < 0

    def __float__(self) -> float:
        return float(self.mid)

    def format(self, digits: int = 12) -> tuple[str, str]:
        """Decimal endpoints rounded outward to ``digits`` significant digits."""
        return _decimal_floor(self.lo, digits), _decimal_floor(-self.hi, digits, negate=True)

    def __repr__(self) -> str:
        lo, hi = self.format(17)
        return f"Interval[{lo}, {hi}]"


def _decimal_floor(x: Fraction, digits: int, negate: bool = False) -> str:
    # floor(x) to `digits` significant decimals; with negate, returns -floor(x) (a ceiling)
    if x == 0:
        return "0"
    e = math.floor(math.log10(abs(x.numerator)) - math.log10(x.denominator))
    scale = digits - 1 - e
    while True:
        m = math.floor(x * Fraction(10) ** scale)
        if abs(m) < 10**digits:
            break
        scale -= 1
    if negate:
        m = -m
    sign = "-" if m < 0 else ""
    s = str(abs(m))
    exp10 = len(s) - 1 - scale
    if exp10 < -6 or exp10 > 15:
        frac = s[1:].rstrip("0")
        return f"{sign}{s[0]}{'.' + frac if frac else ''}e{exp10:+d}"
    s = s.rjust(max(scale, 0) + 1, "0")
    if scale > 0:
        body = s[:-scale] + "." + s[-scale:]
        body = body.rstrip("0").rstrip(".")
    else:
        body = s + "0" * (-scale)
    return sign + body


def _sqrt_floor(x: Fraction, prec: int) -> Fraction:
    if x == 0:
        return x
    e = (x.numerator.bit_length() - x.denominator.bit_length()) // 2
    k = prec - e + 1
    if k >= 0:
        r = math.isqrt((x.numerator << (2 * k)) // x.denominator)
        return Fraction(r, 1 << k)
    r = math.isqrt(x.numerator // (x.denominator << (-2 * k)))
    return Fraction(r << -k)


def _sqrt_ceil(x: Fraction, prec: int) -> Fraction:
    if x == 0:
        return x
    e = (x.numerator.bit_length() - x.denominator.bit_length()) // 2
    k = prec - e + 1
    if k >= 0:
        c = -((-x.numerator << (2 * k)) // x.denominator)
    else:
        c = -(-x.numerator // (x.denominator << (-2 * k)))
    r = math.isqrt(c)
    if r * r < c:
        r += 1
    return Fraction(r, 1 << k) if k >= 0 else Fraction(r << -k)


# -- constants --------------------------------------------------------------

def _arctan_inv_bounds(m: int, bits: int) -> tuple[Fraction, Fraction]:
    """Bracket arctan(1/m) between two consecutive partial sums.

    The series sum_k (-1)^k / ((2k+1) m^(2k+1)) alternates with decreasing
    terms, so the value lies between S_K and S_{K+1}.
    """
    target = Fraction(1, 1 << bits)
    s = Fraction(0)
    k = 0
    while True:
        term = Fraction(1, (2 * k + 1) * m ** (2 * k + 1))
        nxt = s + term if k % 2 == 0 else s - term
        if term < target:
            return (min(s, nxt), max(s, nxt))
        s = nxt
        k += 1


@lru_cache(maxsize=None)
def enclose_pi(precision: int) -> Interval:
    """Enclosure of pi of width at most ``2**-(precision-4)``.

    Machin: pi = 16 arctan(1/5) - 4 arctan(1/239).
    """
    if precision < 16:
        raise ValueError("precision must be >= 16")
    wp = precision + 12
    a_lo, a_hi = _arctan_inv_bounds(5, wp)
    b_lo, b_hi = _arctan_inv_bounds(239, wp)
    return Interval.rounded(16 * a_lo - 4 * b_hi, 16 * a_hi - 4 * b_lo, precision)


@lru_cache(maxsize=4096)
def enclose_exp(x: Number, precision: int) -> Interval:
    """Enclosure of e**x for rational ``|x| <= 64``.

    x = y * 2**k with |y| <= 1/2; Taylor series in y truncated after n terms
    with |remainder| <= |y|**n / n! / (1 - |y|/(n+1)) <= 2 |y|**n / n!, then
    squared k times.
    """
    x = _as_fraction(x)
    if abs(x) > EXP_ARG_LIMIT:
        raise OutOfRange(f"|x| = {float(abs(x)):.4g} exceeds {EXP_ARG_LIMIT}")
    if x == 0:
        return Interval(Fraction(1), Fraction(1), precision)
    k = 0
    while abs(x) > Fraction(1, 2) * 2**k:
        k += 1
    wp = precision + 2 * k + 24
    y = x / 2**k
    ymax = abs(y)
    yi = Interval.point(y, wp)
    total = Interval(Fraction(1), Fraction(1), wp)
    term = total
    n = 1
    target = Fraction(1, 1 << (wp + 2))
    bound = ymax
    while True:
        term = term * yi / n
        total = total + term
        n += 1
        bound = bound * ymax / n
        if bound < target:
            break
    total = total.widen(2 * bound)
    for _ in range(k):
        total = total * total
    return total.with_precision(precision)


def agm(a: Interval, b: Interval, precision: int = DEFAULT_PRECISION) -> Interval:
    """Enclosure of the arithmetic-geometric mean of any reals in ``a`` and ``b``.

    For every iterate the true mean lies between a_k and b_k, hence in the
    hull of their enclosures.
    """
    if a.lo <= 0 or b.lo <= 0:
        raise NonPositiveInput("agm requires positive inputs")
    wp = precision + 16
    a, b = a.with_precision(wp), b.with_precision(wp)
    best = a.hull(b)
    for _ in range(200):
        a, b = (a + b) * Fraction(1, 2), (a * b).sqrt()
        h = a.hull(b)
        if h.width >= best.width:
            break
        best = h
    return best.with_precision(precision)


@lru_cache(maxsize=None)
def enclose_gamma_quarter(precision: int) -> Interval:
    """Enclosure of Gamma(1/4) from Gamma(1/4)**2 = (2 pi)**(3/2) / AGM(sqrt 2, 1)."""
    if precision < 32:
        raise ValueError("precision must be >= 32")
    wp = precision + 16
    two_pi = enclose_pi(wp) * 2
    m = agm(Interval.point(2, wp).sqrt(), Interval.point(1, wp), wp)
    g2 = two_pi * two_pi.sqrt() / m
    return g2.sqrt().with_precision(precision)


def eval_poly_interval(poly: "CoeffPoly", p: Interval, v: Interval) -> Interval:
    """Enclose ``poly(p, v)`` for all reals ``p``, ``v`` in the given intervals."""
    prec = max(p.prec, v.prec)
    total = Interval.point(0, prec)
    for (i, j), c in poly.terms.items():
        total = total + (p**i) * (v**j) * c
    return total


def certified_sign(x: Interval) -> int | None:
    """+1 / -1 if the enclosure is strictly one-signed, else None."""
    if x.lo > 0:
        return 1
    if x.hi < 0:
        return -1
    return None
