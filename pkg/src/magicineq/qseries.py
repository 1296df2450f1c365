"""Truncated q-expansions with coefficients in Q[p, v].

``p`` stands for pi and ``v`` for ``i*z``; on the imaginary axis ``z = i t``
we have ``v = -t`` and every coefficient is real.  A :class:`QSeries` is
stored as a sum ``sum_{(i,j)} p**i v**j * S_ij(q)`` of constant-coefficient
component series, each of which may carry its own growth majorant.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

MAX_DEGREE = 2
MAX_POWER = 24

Key = tuple[int, int]
Scalar = Union[int, Fraction]


class DegreeOverflow(ArithmeticError):
    pass


class MajorantViolation(ArithmeticError):
    pass


class NonInvertibleLeadingCoefficient(ArithmeticError):
    pass


class NonConstantCoefficients(ValueError):
    pass


class RhoNotLessThanOne(ArithmeticError):
    pass


class Majorant(NamedTuple):
    """``|c_n| <= C * (n+1)**s`` for every n >= 0."""

    C: Fraction
    s: int

    def bound(self, n: int) -> Fraction:
        return self.C * (n + 1) ** self.s


# -- coefficient ring -------------------------------------------------------

class CoeffPoly:
    """Polynomial in ``p`` (pi) and ``v`` (i z) with rational coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Key, Scalar] | None = None):
        clean: dict[Key, Fraction] = {}
        for (i, j), c in (terms or {}).items():
            if c:
                if not (0 <= i <= MAX_DEGREE and 0 <= j <= MAX_DEGREE):
                    raise DegreeOverflow(f"monomial p^{i} v^{j} outside the coefficient ring")
                clean[(i, j)] = Fraction(c)
        self._terms = clean

    @classmethod
    def const(cls, c: Scalar) -> "CoeffPoly":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i: int, j: int, c: Scalar = 1) -> "CoeffPoly":
        return cls({(i, j): c})

    @property
    def terms(self) -> Mapping[Key, Fraction]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(k == (0, 0) for k in self._terms)

    def constant(self) -> Fraction:
        if not self.is_constant():
            raise NonConstantCoefficients(f"{self} is not constant")
        return self._terms.get((0, 0), Fraction(0))

    def __add__(self, other: "CoeffPoly | Scalar") -> "CoeffPoly":
        other = _poly(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return CoeffPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "CoeffPoly":
        return CoeffPoly({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "CoeffPoly | Scalar") -> "CoeffPoly":
        return self + (-_poly(other))

    def __rsub__(self, other: Scalar) -> "CoeffPoly":
        return _poly(other) - self

    def __mul__(self, other: "CoeffPoly | Scalar") -> "CoeffPoly":
        other = _poly(other)
        out: dict[Key, Fraction] = {}
        for (i1, j1), a in self._terms.items():
            for (i2, j2), b in other._terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + a * b
        return CoeffPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CoeffPoly.const(other)
        return isinstance(other, CoeffPoly) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        return f"CoeffPoly({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (i, j) in sorted(self._terms, reverse=True):
            c = self._terms[(i, j)]
            mono = "*".join(
                s for s in (_pw("p", i), _pw("v", j)) if s
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _pw(sym: str, k: int) -> str:
    return "" if k == 0 else sym if k == 1 else f"{sym}^{k}"


def _poly(x: "CoeffPoly | Scalar") -> CoeffPoly:
    return x if isinstance(x, CoeffPoly) else CoeffPoly.const(x)


# -- exact integer convolution --------------------------------------------

def convolve_naive(a: Sequence[int], b: Sequence[int], n: int) -> list[int]:
    """Schoolbook Cauchy product truncated to n coefficients (reference)."""
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


def _pack(vals: Sequence[int], width: int) -> int:
    return int.from_bytes(b"".join(v.to_bytes(width, "little") for v in vals), "little")


def convolve(a: Sequence[int], b: Sequence[int], n: int) -> list[int]:
    """Cauchy product truncated to n coefficients, via Kronecker substitution.

    Both operands are packed into one big integer each (base 2**(8*width)),
    multiplied once, and unpacked.  Adding half the digit range to every
    digit makes the signed digits recoverable as fixed-width byte chunks.
    Bit-identical to :func:`convolve_naive`.
    """
    a, b = list(a[:n]), list(b[:n])
    while a and not a[-1]:
        a.pop()
    while b and not b[-1]:
        b.pop()
    if not a or not b:
        return [0] * n
    if min(len(a), len(b)) < 8:
        return convolve_naive(a, b, n)
    ma, mb = max(map(abs, a)), max(map(abs, b))
    # |c_k| <= min(len) * ma * mb < 2**(bits-1)
    bits = ma.bit_length() + mb.bit_length() + min(len(a), len(b)).bit_length() + 1
    width = (bits + 7) // 8
    digits = len(a) + len(b) - 1

    def signed(vals: list[int]) -> int:
        pos = _pack([v if v > 0 else 0 for v in vals], width)
        neg = _pack([-v if v < 0 else 0 for v in vals], width)
        return pos - neg

    half = 1 << (8 * width - 1)
    offset = _pack([half] * digits, width)
    prod = signed(a) * signed(b) + offset
    raw = prod.to_bytes(digits * width, "little")
    take = min(digits, n)
    out = [
        int.from_bytes(raw[k * width:(k + 1) * width], "little") - half for k in range(take)
    ]
    return out + [0] * (n - take)


def _common_denominator(coeffs: Sequence[Fraction]) -> tuple[list[int], int]:
    den = 1
    for c in coeffs:
        if c.denominator != 1:
            den = lcm(den, c.denominator)
    if den == 1:
        return [c.numerator for c in coeffs], 1
    return [c.numerator * (den // c.denominator) for c in coeffs], den


def _mul_components(a: Sequence[Fraction], b: Sequence[Fraction], n: int) -> tuple[Fraction, ...]:
    ai, da = _common_denominator(a)
    bi, db = _common_denominator(b)
    prod = convolve(ai, bi, n)
    d = da * db
    if d == 1:
        return tuple(Fraction(c) for c in prod)
    return tuple(Fraction(c, d) for c in prod)


# -- series -----------------------------------------------------------------

def _combine_add(m1: Majorant | None, m2: Majorant | None) -> Majorant | None:
    if m1 is None or m2 is None:
        return None
    return Majorant(m1.C + m2.C, max(m1.s, m2.s))


class QSeries:
    """Truncated expansion ``sum_{n < order} c_n q**n`` with ``q = exp(pi i z)``.

    ``components`` maps a monomial ``(i, j)`` meaning ``p**i v**j`` to the
    tuple of its rational coefficients (length ``order``).  ``majorants``
    maps the same keys to a growth bound valid for *all* n.
    """

    __slots__ = ("_comps", "_order", "_majorants")

    def __init__(
        self,
        components: Mapping[Key, Sequence[Scalar]],
        order: int,
        majorants: Mapping[Key, Majorant | None] | None = None,
    ):
        if order < 0:
            raise ValueError("order must be non-negative")
        comps: dict[Key, tuple[Fraction, ...]] = {}
        for (i, j), seq in components.items():
            if not (0 <= i <= MAX_DEGREE and 0 <= j <= MAX_DEGREE):
                raise DegreeOverflow(f"monomial p^{i} v^{j} outside the coefficient ring")
            vals = [Fraction(c) for c in seq[:order]]
            vals += [Fraction(0)] * (order - len(vals))
            if any(vals):
                comps[(i, j)] = tuple(vals)
        self._comps = comps
        self._order = order
        self._majorants: dict[Key, Majorant] = {}
        for k, m in (majorants or {}).items():
            if m is not None and k in comps:
                self._majorants[k] = Majorant(Fraction(m.C), m.s)
        self._check_majorants()

    # -- construction helpers -------------------------------------------
    @classmethod
    def constant(
        cls, coeffs: Sequence[Scalar], order: int | None = None, majorant: Majorant | None = None
    ) -> "QSeries":
        order = len(coeffs) if order is None else order
        return cls({(0, 0): coeffs}, order, {(0, 0): majorant})

    @classmethod
    def from_coeffs(
        cls, coeffs: Mapping[int, CoeffPoly | Scalar], order: int, finite: bool = False
    ) -> "QSeries":
        """Series from explicit coefficients.

        With ``finite=True`` the listed terms are the whole function (a
        polynomial in q), so ``(max |c_n|, 0)`` is a majorant for all n.
        """
        comps: dict[Key, list[Fraction]] = {}
        for n, c in coeffs.items():
            if n >= order:
                continue
            if n < 0:
                raise ValueError("negative exponents are not supported")
            for k, v in _poly(c).terms.items():
                comps.setdefault(k, [Fraction(0)] * order)[n] = v
        majs = None
        if finite:
            majs = {k: Majorant(max(map(abs, seq)), 0) for k, seq in comps.items()}
        return cls(comps, order, majs)

    @classmethod
    def one(cls, order: int) -> "QSeries":
        return cls.constant([1], order, Majorant(Fraction(1), 0))

    @classmethod
    def zero(cls, order: int) -> "QSeries":
        return cls({}, order)

    def _check_majorants(self) -> None:
        for k, m in self._majorants.items():
            for n, c in enumerate(self._comps[k]):
                if c and abs(c) > m.bound(n):
                    raise MajorantViolation(
                        f"component {k}: |c_{n}| = {abs(c)} exceeds {m.C}*(n+1)^{m.s}"
                    )

    # -- accessors --------------------------------------------------------
    @property
    def order(self) -> int:
        return self._order

    @property
    def components(self) -> Mapping[Key, tuple[Fraction, ...]]:
        return self._comps

    @property
    def majorants(self) -> Mapping[Key, Majorant]:
        return self._majorants

    @property
    def majorant(self) -> Majorant | None:
        """Majorant of a constant-coefficient series (None otherwise)."""
        if not self.is_constant():
            return None
        if not self._comps:
            return Majorant(Fraction(0), 0)
        return self._majorants.get((0, 0))

    def has_majorants(self) -> bool:
        return all(k in self._majorants for k in self._comps)

    def is_constant(self) -> bool:
        return all(k == (0, 0) for k in self._comps)

    def is_zero(self) -> bool:
        return not self._comps

    def coeff(self, n: int) -> CoeffPoly:
        if not 0 <= n < self._order:
            raise IndexError(f"coefficient {n} outside truncation order {self._order}")
        return CoeffPoly({k: seq[n] for k, seq in self._comps.items()})

    def __getitem__(self, n: int) -> CoeffPoly:
        return self.coeff(n)

    def constant_coeffs(self) -> list[Fraction]:
        if not self.is_constant():
            raise NonConstantCoefficients("series has z-dependent coefficients")
        return list(self._comps.get((0, 0), (Fraction(0),) * self._order))

    def nonzero(self) -> Iterator[tuple[int, CoeffPoly]]:
        for n in range(self._order):
            c = self.coeff(n)
            if not c.is_zero():
                yield n, c

    def valuation(self) -> int | None:
        """Smallest exponent with a nonzero coefficient (None for the zero series)."""
        idx = [next(n for n, c in enumerate(seq) if c) for seq in self._comps.values()]
        return min(idx) if idx else None

    # -- structural operations -------------------------------------------
    def truncate(self, order: int) -> "QSeries":
        order = min(order, self._order)
        return QSeries(self._comps, order, self._majorants)

    def mul_q(self, k: int) -> "QSeries":
        """Multiply by q**k (order grows by k; majorants stay valid)."""
        comps = {key: (Fraction(0),) * k + seq for key, seq in self._comps.items()}
        return QSeries(comps, self._order + k, self._majorants)

    def div_q(self, k: int) -> "QSeries":
        """Divide by q**k; the first k coefficients must vanish."""
        for key, seq in self._comps.items():
            if any(seq[:k]):
                raise ValueError(f"cannot divide by q^{k}: nonzero coefficient below q^{k}")
        comps = {key: seq[k:] for key, seq in self._comps.items()}
        # c'_n = c_{n+k} <= C (n+k+1)^s <= C (k+1)^s (n+1)^s
        majs = {key: Majorant(m.C * (k + 1) ** m.s, m.s) for key, m in self._majorants.items()}
        return QSeries(comps, max(self._order - k, 0), majs)

    def with_coeff(self, n: int, value: CoeffPoly | Scalar) -> "QSeries":
        """Copy with coefficient n replaced; majorants are dropped."""
        comps = {k: list(v) for k, v in self._comps.items()}
        for k in comps:
            comps[k][n] = Fraction(0)
        for k, c in _poly(value).terms.items():
            comps.setdefault(k, [Fraction(0)] * self._order)[n] = c
        return QSeries(comps, self._order)

    def without_majorants(self) -> "QSeries":
        return QSeries(self._comps, self._order)

    # -- ring operations ----------------------------------------------------
    def _lift(self, other: "QSeries | CoeffPoly | Scalar") -> "QSeries":
        if isinstance(other, QSeries):
            return other
        poly = _poly(other)
        comps = {k: [c] for k, c in poly.terms.items()}
        majs = {k: Majorant(abs(c), 0) for k, c in poly.terms.items()}
        return QSeries(comps, self._order, majs)

    def __add__(self, other):
        return add(self, self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, self._lift(other))

    def __rsub__(self, other):
        return sub(self._lift(other), self)

    def __neg__(self) -> "QSeries":
        return scale(self, -1)

    def __mul__(self, other):
        if isinstance(other, QSeries):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return div(self, other)
        return scale(self, 1 / Fraction(other))

    def __pow__(self, k: int) -> "QSeries":
        return pow(self, k)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, QSeries)
            and self._order == other._order
            and self._comps == other._comps
        )

    def __hash__(self) -> int:
        return hash((self._order, frozenset(self._comps.items())))

    def __repr__(self) -> str:
        shown = []
        for n, c in self.nonzero():
            if len(shown) == 6:
                shown.append("...")
                break
            s = str(c)
            shown.append(f"({s})*q^{n}" if len(c.terms) > 1 else f"{s}*q^{n}")
        body = " + ".join(shown) if shown else "0"
        return f"QSeries[{body}; O(q^{self._order})]"


def add(a: QSeries, b: QSeries) -> QSeries:
    n = min(a.order, b.order)
    keys = set(a.components) | set(b.components)
    comps = {}
    majs = {}
    zero = (Fraction(0),) * n
    for k in keys:
        x, y = a.components.get(k, zero), b.components.get(k, zero)
        comps[k] = [x[i] + y[i] for i in range(n)]
        ma = a.majorants.get(k) if k in a.components else Majorant(Fraction(0), 0)
        mb = b.majorants.get(k) if k in b.components else Majorant(Fraction(0), 0)
        majs[k] = _combine_add(ma, mb)
    return QSeries(comps, n, majs)


def sub(a: QSeries, b: QSeries) -> QSeries:
    return add(a, scale(b, -1))


def scale(a: QSeries, c: CoeffPoly | Scalar) -> QSeries:
    """Multiply every coefficient by a constant or a monomial-sum in (p, v)."""
    poly = _poly(c)
    comps: dict[Key, list[Fraction]] = {}
    majs: dict[Key, Majorant | None] = {}
    for (i2, j2), r in poly.terms.items():
        for (i1, j1), seq in a.components.items():
            k = (i1 + i2, j1 + j2)
            if k[0] > MAX_DEGREE or k[1] > MAX_DEGREE:
                raise DegreeOverflow(f"product leaves the coefficient ring at p^{k[0]} v^{k[1]}")
            m = a.majorants.get((i1, j1))
            m = Majorant(abs(r) * m.C, m.s) if m is not None else None
            if k in comps:
                comps[k] = [x + r * y for x, y in zip(comps[k], seq)]
                majs[k] = _combine_add(majs[k], m)
            else:
                comps[k] = [r * y for y in seq]
                majs[k] = m
    return QSeries(comps, a.order, majs)


def mul(a: QSeries, b: QSeries) -> QSeries:
    """Exact Cauchy product; majorants combine as (C1*C2, s1+s2+1)."""
    n = min(a.order, b.order)
    comps: dict[Key, list[Fraction]] = {}
    majs: dict[Key, Majorant | None] = {}
    for (i1, j1), x in a.components.items():
        for (i2, j2), y in b.components.items():
            k = (i1 + i2, j1 + j2)
            if k[0] > MAX_DEGREE or k[1] > MAX_DEGREE:
                raise DegreeOverflow(f"product leaves the coefficient ring at p^{k[0]} v^{k[1]}")
            prod = _mul_components(x, y, n)
            ma, mb = a.majorants.get((i1, j1)), b.majorants.get((i2, j2))
            m = Majorant(ma.C * mb.C, ma.s + mb.s + 1) if ma and mb else None
            if k in comps:
                comps[k] = [u + w for u, w in zip(comps[k], prod)]
                majs[k] = _combine_add(majs[k], m)
            else:
                comps[k] = list(prod)
                majs[k] = m
    return QSeries(comps, n, majs)


def pow(a: QSeries, k: int) -> QSeries:
    """Binary powering; ``k <= 24``."""
    if not 0 <= k <= MAX_POWER:
        raise ValueError(f"power {k} outside 0..{MAX_POWER}")
    result = QSeries.one(a.order)
    base = a
    while k:
        if k & 1:
            result = mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return result


def div(a: QSeries, b: QSeries) -> QSeries:
    """Quotient a/b for constant-coefficient ``b = q**k u`` with u(0) != 0.

    ``a`` must vanish below q**k.  The result has order
    ``min(order(a), order(b)) - k`` and carries no majorant.
    """
    if not b.is_constant():
        raise NonInvertibleLeadingCoefficient("divisor must have constant coefficients")
    k = b.valuation()
    if k is None:
        raise NonInvertibleLeadingCoefficient("division by the zero series")
    u = b.constant_coeffs()[k:]
    n = min(a.order, b.order) - k
    a = a.truncate(n + k).div_q(k) if k else a.truncate(n)
    u0 = u[0]
    comps = {}
    for key, seq in a.components.items():
        r: list[Fraction] = []
        for m in range(n):
            acc = seq[m]
            for j in range(1, min(m, len(u) - 1) + 1):
                if u[j]:
                    acc -= u[j] * r[m - j]
            r.append(acc / u0)
        comps[key] = r
    return QSeries(comps, n)


def half_period_shift(a: QSeries) -> QSeries:
    """z -> z+1, i.e. q -> -q; only defined for constant coefficients."""
    if not a.is_constant():
        raise NonConstantCoefficients("half-period shift of a z-dependent series")
    seq = a.constant_coeffs()
    return QSeries.constant(
        [c if n % 2 == 0 else -c for n, c in enumerate(seq)], a.order, a.majorant
    )


# -- restriction to the imaginary axis --------------------------------------

AxisPoly = dict[Key, Fraction]  # (deg_p, deg_T) -> coefficient


class AxisSeries:
    """``sum_n poly_n(pi, t) * exp(-n pi t)``: a series restricted to z = i t."""

    __slots__ = ("_coeffs", "_order")

    def __init__(self, coeffs: Mapping[int, Mapping[Key, Scalar]], order: int):
        clean: dict[int, AxisPoly] = {}
        for n, poly in coeffs.items():
            p = {k: Fraction(c) for k, c in poly.items() if c}
            if p and n < order:
                clean[n] = p
        self._coeffs = clean
        self._order = order

    @property
    def order(self) -> int:
        return self._order

    @property
    def coeffs(self) -> Mapping[int, AxisPoly]:
        return self._coeffs

    def poly(self, n: int) -> AxisPoly:
        return dict(self._coeffs.get(n, {}))

    def is_zero(self) -> bool:
        return not self._coeffs

    def __sub__(self, other: "AxisSeries") -> "AxisSeries":
        order = min(self._order, other._order)
        out: dict[int, dict[Key, Fraction]] = {}
        for n in set(self._coeffs) | set(other._coeffs):
            p = dict(self._coeffs.get(n, {}))
            for k, c in other._coeffs.get(n, {}).items():
                p[k] = p.get(k, 0) - c
            out[n] = p
        return AxisSeries(out, order)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, AxisSeries)
            and self._order == other._order
            and self._coeffs == other._coeffs
        )

    def __repr__(self) -> str:
        return f"AxisSeries({self._coeffs!r}, order={self._order})"


def to_axis(a: QSeries) -> AxisSeries:
    """Substitute v = -T (z = i t); p is kept symbolic."""
    out: dict[int, dict[Key, Fraction]] = {}
    for (i, j), seq in a.components.items():
        sign = -1 if j % 2 else 1
        for n, c in enumerate(seq):
            if c:
                out.setdefault(n, {})[(i, j)] = sign * c
    return AxisSeries(out, a.order)


def diff_t(a: AxisSeries) -> AxisSeries:
    """Termwise d/dt of poly_n(p, T) e^{-n p T}: d/dT poly_n - n p poly_n."""
    out: dict[int, dict[Key, Fraction]] = {}
    for n, poly in a.coeffs.items():
        d: dict[Key, Fraction] = {}
        for (i, j), c in poly.items():
            if j:
                d[(i, j - 1)] = d.get((i, j - 1), 0) + j * c
            if n:
                d[(i + 1, j)] = d.get((i + 1, j), 0) - n * c
        out[n] = d
    return AxisSeries(out, a.order)


def tail_bound(majorant: Majorant | tuple[Scalar, int], N: int, x_hi: Scalar) -> Fraction:
    """Upper bound for ``sum_{n > N} C (n+1)**s x**n`` valid for 0 < x <= x_hi.

    Consecutive majorant terms have ratio x ((n+2)/(n+1))**s, which for
    n >= N+1 is at most rho = x_hi ((N+3)/(N+2))**s; the tail is then
    dominated by a geometric series starting at C (N+2)**s x_hi**(N+1).
    """
    C, s = Fraction(majorant[0]), int(majorant[1])
    x_hi = Fraction(x_hi)
    rho = x_hi * Fraction(N + 3, N + 2) ** s
    if rho >= 1:
        raise RhoNotLessThanOne(f"rho = {float(rho):.4g} >= 1 at N = {N}; increase N")
    return C * (N + 2) ** s * x_hi ** (N + 1) / (1 - rho)


def iter_sum(series: Iterable[QSeries]) -> QSeries:
    it = iter(series)
    total = next(it)
    for s in it:
        total = add(total, s)
    return total
