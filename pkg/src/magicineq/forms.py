"""The named modular and quasimodular forms as exact truncated q-series.

Conventions: ``q = exp(pi i z)``, so Eisenstein series live on even powers;
theta_2 only enters through ``X = theta_2**4``, which has integer exponents.
Coefficients that depend on z use ``v = i z`` (see :mod:`magicineq.qseries`).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping

from .qseries import (
    CoeffPoly,
    Majorant,
    QSeries,
    div,
    half_period_shift,
    mul,
    pow,
)

DEFAULT_ORDER = 128
IDENTITY_ORDER = 200

BASE_TABLES = ("E2", "E4", "E6", "THETA3", "THETA4", "THETA2_4")

ENTRIES = (
    "E2", "E4", "E6", "THETA2_4", "THETA3", "THETA4",
    "X", "Z", "W", "Y",
    "DELTA_POLY", "DELTA_PROD", "E2E4_E6", "PHI0_NUM", "PSI_I",
    "F", "F_TILDE", "G", "G_TILDE", "GAMMA_FN",
    "F_CAP", "G_CAP", "H_FN", "H_THETA", "F1", "F2", "F3",
)

# |coefficient of q^n| <= C (n+1)^s; re-verified against every computed coefficient
DEFAULT_MAJORANTS = {
    "E2": Majorant(Fraction(24), 2),
    "E4": Majorant(Fraction(240), 4),
    "E6": Majorant(Fraction(504), 6),
    "THETA3": Majorant(Fraction(2), 0),
    "THETA4": Majorant(Fraction(2), 0),
    "THETA2_4": Majorant(Fraction(16), 3),
}

P = CoeffPoly.monomial(1, 0)
V = CoeffPoly.monomial(0, 1)


def divisor_sums(m: int, k: int) -> list[int]:
    """sigma_k(n) for 0 <= n <= m (sigma_k(0) = 0) by a divisor sieve."""
    sig = [0] * (m + 1)
    for d in range(1, m + 1):
        dk = d**k
        for mult in range(d, m + 1, d):
            sig[mult] += dk
    return sig


_EISENSTEIN_FACTORS = {2: (-24, 1), 4: (240, 3), 6: (-504, 5)}


def eisenstein(k: int, N: int) -> QSeries:
    """E_k = 1 + c_k sum sigma_{k-1}(n) q^{2n} for k in {2, 4, 6}."""
    if k not in _EISENSTEIN_FACTORS:
        raise ValueError("k must be 2, 4 or 6")
    if N < 2:
        raise ValueError("order must be >= 2")
    factor, power = _EISENSTEIN_FACTORS[k]
    sig = divisor_sums((N - 1) // 2, power)
    coeffs = [0] * N
    coeffs[0] = 1
    for n in range(1, (N - 1) // 2 + 1):
        coeffs[2 * n] = factor * sig[n]
    return QSeries.constant(coeffs, N, DEFAULT_MAJORANTS[f"E{k}"])


def theta(which: str, N: int) -> QSeries:
    """theta_3, theta_4 or theta_2**4 (``THETA2_4``) to order N."""
    if N < 2:
        raise ValueError("order must be >= 2")
    if which in ("THETA3", "THETA4"):
        coeffs = [0] * N
        coeffs[0] = 1
        n = 1
        while n * n < N:
            coeffs[n * n] = 2 if which == "THETA3" or n % 2 == 0 else -2
            n += 1
        return QSeries.constant(coeffs, N, DEFAULT_MAJORANTS[which])
    if which == "THETA2_4":
        # theta_2 = 2 q^{1/4} sum_{n>=0} q^{n(n+1)}, so theta_2^4 = 16 q (sum q^{n(n+1)})^4
        base = [0] * N
        n = 0
        while n * (n + 1) < N:
            base[n * (n + 1)] = 1
            n += 1
        b4 = pow(QSeries.constant(base, N, Majorant(Fraction(1), 0)), 4)
        x = (b4 * 16).mul_q(1).truncate(N)
        return QSeries.constant(x.constant_coeffs(), N, DEFAULT_MAJORANTS["THETA2_4"])
    raise ValueError(f"unknown theta series {which!r}")


def delta_product(N: int) -> QSeries:
    """1728 q^2 prod_{n>=1} (1 - q^{2n})^24, by direct multiplication of factors."""
    prod = [0] * N
    prod[0] = 1
    for m in range(2, N, 2):
        # multiply in place by (1 - q^m)
        for i in range(N - 1, m - 1, -1):
            prod[i] -= prod[i - m]
    p24 = pow(QSeries.constant(prod, N), 24)
    return (p24 * 1728).mul_q(2).truncate(N)


def e4_derivative_series(N: int) -> QSeries:
    """720 sum n sigma_3(n) q^{2n}."""
    sig = divisor_sums((N - 1) // 2, 3)
    coeffs = [0] * N
    for n in range(1, (N - 1) // 2 + 1):
        coeffs[2 * n] = 720 * n * sig[n]
    return QSeries.constant(coeffs, N)


@dataclass(frozen=True)
class CoeffSequences:
    """Named coefficient sequences, indexed by exponent.

    ``a[n]`` is the coefficient of q^n in f divided by pi^2; ``c[n]`` are the
    polynomial coefficients of f-tilde; ``alpha[n]``, ``beta[n]``,
    ``delta[n]`` are coefficients of q^{2n}.
    """

    order: int
    a: list[Fraction]
    b: list[Fraction]
    c: list[CoeffPoly]
    d: list[Fraction]
    alpha: list[Fraction]
    beta: list[Fraction]
    delta: list[Fraction]


class Forms(Mapping[str, QSeries]):
    """Lazily built, memoized registry of every named series at one order.

    ``tables`` replaces base series (keys of ``BASE_TABLES``); derived
    entries are then rebuilt from the replacements, which is how corrupted
    fixtures are injected.
    """

    def __init__(self, order: int = DEFAULT_ORDER, tables: Mapping[str, QSeries] | None = None):
        if order < 2:
            raise ValueError("order must be >= 2")
        unknown = set(tables or ()) - set(BASE_TABLES)
        if unknown:
            raise KeyError(f"not base tables: {sorted(unknown)}")
        self.order = order
        self._tables = dict(tables or {})
        self._cache: dict[str, QSeries] = {}
        self._sequences: CoeffSequences | None = None
        self._lock = threading.RLock()

    def __getitem__(self, name: str) -> QSeries:
        hit = self._cache.get(name)
        if hit is not None:
            return hit
        if name not in _RECIPES:
            raise KeyError(name)
        with self._lock:
            if name not in self._cache:
                self._cache[name] = _RECIPES[name](self)
            return self._cache[name]

    def __iter__(self):
        return iter(ENTRIES)

    def __len__(self) -> int:
        return len(ENTRIES)

    def base(self, name: str) -> QSeries:
        if name in self._tables:
            return self._tables[name].truncate(self.order)
        if name.startswith("E"):
            return eisenstein(int(name[1]), self.order)
        return theta(name, self.order)

    def sequences(self) -> CoeffSequences:
        if self._sequences is None:
            with self._lock:
                if self._sequences is None:
                    self._sequences = self._build_sequences()
        return self._sequences

    def _build_sequences(self) -> CoeffSequences:
        N = self.order
        f = self["F"]
        a = list(f.components.get((2, 0), (Fraction(0),) * N))
        b = self["G"].constant_coeffs()
        ft = self["F_TILDE"]
        c = [ft.coeff(n) for n in range(N)]
        d = self["G_TILDE"].constant_coeffs()
        alpha = self["E2E4_E6"] ** 2
        beta = self["E4"] ** 2 - 1
        delta = self["E4"] * self["E2E4_E6"]
        even = lambda s: s.constant_coeffs()[::2]  # noqa: E731
        return CoeffSequences(N, a, b, c, d, even(alpha), even(beta), even(delta))


def _recipes() -> dict[str, Callable[[Forms], QSeries]]:
    r: dict[str, Callable[[Forms], QSeries]] = {}
    for name in BASE_TABLES:
        r[name] = lambda fm, name=name: fm.base(name)
    r["X"] = lambda fm: fm["THETA2_4"]
    r["Z"] = lambda fm: fm["THETA3"] ** 4
    r["W"] = lambda fm: fm["THETA4"] ** 4
    r["Y"] = lambda fm: fm["Z"] * 2 - fm["X"]
    r["DELTA_POLY"] = lambda fm: fm["E4"] ** 3 - fm["E6"] ** 2
    r["DELTA_PROD"] = lambda fm: delta_product(fm.order)
    r["E2E4_E6"] = lambda fm: fm["E2"] * fm["E4"] - fm["E6"]
    r["PHI0_NUM"] = lambda fm: fm["E2E4_E6"] ** 2 * 1728
    r["PSI_I"] = _psi_i
    # f = (pi^2/18)(E2E4 - E6)^2
    r["F"] = lambda fm: fm["E2E4_E6"] ** 2 * CoeffPoly.monomial(2, 0, Fraction(1, 18))
    r["F_TILDE"] = _f_tilde
    r["G"] = _g
    r["G_TILDE"] = _g_tilde
    r["GAMMA_FN"] = lambda fm: fm["X"] ** 2 * fm["Z"] ** 3 + fm["X"] ** 3 * fm["Z"] ** 2
    r["F_CAP"] = lambda fm: -(fm["F_TILDE"] - 2).div_q(2)
    r["G_CAP"] = lambda fm: -(fm["G_TILDE"] - 2).div_q(2)
    r["H_FN"] = lambda fm: (fm["G_CAP"] - half_period_shift(fm["G_CAP"])) * Fraction(1, 2)
    r["H_THETA"] = _h_theta
    r["F1"] = _f1
    r["F2"] = _f2
    r["F3"] = _f3
    return r


def _psi_i(fm: Forms) -> QSeries:
    """q^2 * psi_I: psi_I has a double pole in q, so the entry is shifted by q^2."""
    X, Z, W = fm["X"], fm["Z"], fm["W"]
    num = ((Z + W) * Z**2 + (W - X) * X**2) * 128
    return div(num.mul_q(2), mul(X**2, Z**2))


def _f_tilde(fm: Forms) -> QSeries:
    # z^2 = -v^2 and i z = v:
    # -(pi^2/18) A z^2 + (2 pi i/3) D z + 2 E4^2 = (p^2 v^2/18) A + (2/3) p v D + 2 E4^2
    A = fm["E2E4_E6"] ** 2
    D = fm["E4"] * fm["E2E4_E6"]
    return (
        A * CoeffPoly.monomial(2, 2, Fraction(1, 18))
        + D * CoeffPoly.monomial(1, 1, Fraction(2, 3))
        + fm["E4"] ** 2 * 2
    )


def _g(fm: Forms) -> QSeries:
    X, Z, W = fm["X"], fm["Z"], fm["W"]
    return X**2 * (Z**3 + X * Z**2 + X * W**2 - W**3)


def _g_tilde(fm: Forms) -> QSeries:
    X, Z, W = fm["X"], fm["Z"], fm["W"]
    return W**2 * (Z**3 + W * Z**2 + X**2 * W - X**3)


def _h_theta(fm: Forms) -> QSeries:
    X, Z, W = fm["X"], fm["Z"], fm["W"]
    poly = X**2 * (Z**3 - W**3) + X**3 * (Z**2 + W**2)
    return (poly * Fraction(1, 2)).div_q(2)


def _f1(fm: Forms) -> QSeries:
    # -480 pi i z + (28800 pi^2 z^2 - 123840 pi i z - 123840) q^2
    c0 = CoeffPoly({(1, 1): -480})
    c2 = CoeffPoly({(2, 2): -28800, (1, 1): -123840, (0, 0): -123840})
    return QSeries.from_coeffs({0: c0, 2: c2}, fm.order - 2, finite=True)


def _f2(fm: Forms) -> QSeries:
    # (pi^2/18) q^-2 A z^2 - 2 q^-2 (E4^2 - 1) + (-28800 pi^2 z^2 + 123840) q^2
    A = fm["E2E4_E6"] ** 2
    head = (A * CoeffPoly.monomial(2, 2, Fraction(-1, 18))).div_q(2)
    mid = ((fm["E4"] ** 2 - 1) * -2).div_q(2)
    tail = QSeries.from_coeffs({2: CoeffPoly({(2, 2): 28800, (0, 0): 123840})}, fm.order - 2, finite=True)
    return head + mid + tail


def _f3(fm: Forms) -> QSeries:
    # -(2 pi i/3) q^-2 E4 (E2E4 - E6) z + (480 pi i z + 123840 pi i z q^2)
    D = fm["E4"] * fm["E2E4_E6"]
    head = (D * CoeffPoly.monomial(1, 1, Fraction(-2, 3))).div_q(2)
    tail = QSeries.from_coeffs(
        {0: CoeffPoly.monomial(1, 1, 480), 2: CoeffPoly.monomial(1, 1, 123840)}, fm.order - 2,
        finite=True,
    )
    return head + tail


_RECIPES = _recipes()


@lru_cache(maxsize=8)
def registry(order: int = DEFAULT_ORDER) -> Forms:
    """Shared registry of uncorrupted series at ``order``."""
    return Forms(order)


def build(entry: str, N: int = DEFAULT_ORDER) -> QSeries:
    return registry(N)[entry]


def sequences(N: int = DEFAULT_ORDER) -> CoeffSequences:
    return registry(N).sequences()
