"""Certified evaluation on the imaginary axis and pointwise sign certificates.

A series is evaluated at ``z = i t`` by summing its stored coefficients
against an enclosure of ``x = exp(-pi t)`` and adding the majorant tail
``sum_{n >= N} C (n+1)**s x**n``.  Sign certificates only ever evaluate
polynomial (denominator-cleared) combinations; no series is divided.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .forms import DEFAULT_ORDER, registry
from .numerics import (
    DEFAULT_PRECISION,
    PRECISION_CEILING,
    Interval,
    enclose_pi,
)
from .qseries import QSeries, RhoNotLessThanOne, tail_bound

ORDER_CEILING = 1024

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

A_NEGATIVE = "A_NEGATIVE"
B_POSITIVE = "B_POSITIVE"

RegistryFactory = Callable[[int], Mapping[str, QSeries]]


class MissingMajorant(ValueError):
    pass


@dataclass(frozen=True)
class AxisPoint:
    t: Fraction
    precision: int = DEFAULT_PRECISION
    order: int = DEFAULT_ORDER

    def __post_init__(self) -> None:
        if self.t <= 0:
            raise ValueError("t must be positive")


@dataclass
class SignCertificate:
    target: str
    t: Fraction
    status: str
    enclosures: dict[str, Interval] = field(default_factory=dict)
    order: int = DEFAULT_ORDER
    precision: int = DEFAULT_PRECISION
    route: str = ""
    value: Interval | None = None

    def to_dict(self) -> dict:
        def iv(x: Interval) -> list[str]:
            return list(x.format(17))

        return {
            "check_id": f"{self.target}@{self.t}",
            "status": self.status,
            "evidence": {
                "t": str(self.t),
                "route": self.route,
                "value": iv(self.value) if self.value is not None else None,
                "enclosures": {k: iv(v) for k, v in self.enclosures.items()},
            },
            "params": {"order": self.order, "precision": self.precision},
        }


def eval_series(series: QSeries, t: Fraction, precision: int = DEFAULT_PRECISION) -> Interval:
    """Enclose the value of ``series`` at z = i t (v = -t, p = pi)."""
    t = Fraction(t)
    if t <= 0:
        raise ValueError("t must be positive")
    if not series.has_majorants():
        raise MissingMajorant("series has a component without a majorant")
    pi = enclose_pi(precision)
    x = (-(pi * t)).exp()
    v = Interval.point(-t, precision)
    N = series.order
    total = Interval.point(0, precision)
    for (i, j), seq in series.components.items():
        part = _sum_powers(seq, x, precision)
        tail = tail_bound(series.majorants[(i, j)], N - 1, x.hi)
        part = part.widen(tail)
        total = total + part * (pi**i) * (v**j)
    return total


def _sum_powers(seq, x: Interval, precision: int) -> Interval:
    den = 1
    for c in seq:
        if c.denominator != 1:
            den = math.lcm(den, c.denominator)
    acc = Interval.point(0, precision)
    xn = Interval.point(1, precision)
    for c in seq:
        if c:
            acc = acc + xn * (c.numerator * (den // c.denominator))
        xn = xn * x
    return acc * Fraction(1, den) if den != 1 else acc


def eval_axis(
    entry: str | QSeries, point: AxisPoint, forms: RegistryFactory = registry
) -> Interval:
    """Enclosure of a registry entry (or explicit series) at z = i t."""
    series = forms(point.order)[entry] if isinstance(entry, str) else entry
    return eval_series(series, point.t, point.precision)


def tail_ratio(series: QSeries, t: Fraction, precision: int = DEFAULT_PRECISION) -> Fraction:
    """Largest component tail bound divided by the leading stored term at x = exp(-pi t)."""
    x_hi = (-(enclose_pi(precision) * Fraction(t))).exp().hi
    worst = Fraction(0)
    for k, seq in series.components.items():
        n0 = next(n for n, c in enumerate(seq) if c)
        lead = abs(seq[n0]) * x_hi**n0
        worst = max(worst, tail_bound(series.majorants[k], series.order - 1, x_hi) / lead)
    return worst


# -- sign certificates ------------------------------------------------------

def _positive_enclosure(
    series_of: Callable[[int], QSeries], t: Fraction, order: int, precision: int
) -> tuple[Interval | None, int, int]:
    """Escalate N (to 1024) then precision (to 1024 bits) until the sign is decided."""
    last = None
    while True:
        try:
            last = eval_series(series_of(order), t, precision)
            if last.lo > 0 or last.hi <= 0:
                return last, order, precision
        except RhoNotLessThanOne:
            pass
        if order < ORDER_CEILING:
            order = min(2 * order, ORDER_CEILING)
        elif precision < PRECISION_CEILING:
            precision = min(2 * precision, PRECISION_CEILING)
        else:
            return last, order, precision


def _status(enclosures: Mapping[str, Interval | None]) -> str:
    if any(e is not None and e.hi <= 0 for e in enclosures.values()):
        return FAIL
    if all(e is not None and e.lo > 0 for e in enclosures.values()):
        return PASS
    return INCONCLUSIVE


def certify_A_negative(
    t: Fraction,
    order: int = DEFAULT_ORDER,
    precision: int = DEFAULT_PRECISION,
    forms: RegistryFactory = registry,
) -> SignCertificate:
    """Certify A(t) = -t^2 phi0(i/t) - (36/pi^2) psi_I(it) < 0.

    phi0(i/t) > 0 from PHI0_NUM(i/t) > 0 and DELTA_POLY(i/t) > 0;
    psi_I(it) > 0 from G_TILDE(it) > 0 and DELTA_POLY(it) > 0
    (psi_I = 864 g~/Delta).  Fails if any of the four is certified <= 0.
    """
    t = Fraction(t)
    if t <= 0:
        raise ValueError("t must be positive")
    s = 1 / t
    plan = [
        ("PHI0_NUM(i/t)", "PHI0_NUM", s),
        ("DELTA_POLY(i/t)", "DELTA_POLY", s),
        ("G_TILDE(it)", "G_TILDE", t),
        ("DELTA_POLY(it)", "DELTA_POLY", t),
    ]
    enc: dict[str, Interval | None] = {}
    n_used, p_used = order, precision
    for label, entry, at in plan:
        iv, n, p = _positive_enclosure(lambda N, e=entry: forms(N)[e], at, order, precision)
        enc[label] = iv
        n_used, p_used = max(n_used, n), max(p_used, p)
    status = _status(enc)
    value = None
    if status == PASS:
        pi = enclose_pi(p_used)
        phi0 = enc["PHI0_NUM(i/t)"] / enc["DELTA_POLY(i/t)"]
        psi = enc["G_TILDE(it)"] * 864 / enc["DELTA_POLY(it)"]
        value = -(phi0 * (t * t)) - psi * 36 / (pi * pi)
    return SignCertificate(
        A_NEGATIVE, t, status, {k: v for k, v in enc.items() if v is not None},
        n_used, p_used, "direct", value,
    )


def certify_B_positive(
    t: Fraction,
    order: int = DEFAULT_ORDER,
    precision: int = DEFAULT_PRECISION,
    forms: RegistryFactory = registry,
    route: str | None = None,
) -> SignCertificate:
    """Certify B(t) > 0.

    ``direct`` (default for t >= 1): g~(it) - f~(it) > 0, since
    g~ - f~ = (pi^2/31104) Delta(it) B(t).  ``reciprocal`` (default for
    t < 1): g(is) - f(is) > 0 at s = 1/t, since
    g - f = (pi^2/31104) Delta(is) s^2 B(1/s).  Delta > 0 is certified at
    the same point.
    """
    t = Fraction(t)
    if t <= 0:
        raise ValueError("t must be positive")
    if route is None:
        route = "direct" if t >= 1 else "reciprocal"
    if route == "direct":
        at, pair, label = t, ("G_TILDE", "F_TILDE"), "G_TILDE-F_TILDE(it)"
        dlabel = "DELTA_POLY(it)"
    elif route == "reciprocal":
        at, pair, label = 1 / t, ("G", "F"), "G-F(i/t)"
        dlabel = "DELTA_POLY(i/t)"
    else:
        raise ValueError(f"unknown route {route!r}")

    def margin(N: int) -> QSeries:
        fm = forms(N)
        return fm[pair[0]] - fm[pair[1]]

    m, n1, p1 = _positive_enclosure(margin, at, order, precision)
    d, n2, p2 = _positive_enclosure(lambda N: forms(N)["DELTA_POLY"], at, order, precision)
    enc = {label: m, dlabel: d}
    status = _status(enc)
    n_used, p_used = max(n1, n2), max(p1, p2)
    value = None
    if status == PASS:
        pi = enclose_pi(p_used)
        value = m * 31104 / (d * pi * pi)
        if route == "reciprocal":
            value = value * (t * t)
    return SignCertificate(
        B_POSITIVE, t, status, {k: v for k, v in enc.items() if v is not None},
        n_used, p_used, route, value,
    )


# -- grid scan ----------------------------------------------------------------

@dataclass
class GridRow:
    t: Fraction
    A: SignCertificate
    B: SignCertificate


@dataclass
class GridReport:
    rows: list[GridRow]

    @property
    def all_pass(self) -> bool:
        return all(r.A.status == PASS and r.B.status == PASS for r in self.rows)


def geometric_grid(t_min: Fraction, t_max: Fraction, steps: int) -> list[Fraction]:
    """``steps`` rational points, approximately geometric, endpoints exact.

    The k-th and (steps-1-k)-th points multiply to t_min*t_max exactly, so on
    a range symmetric under t -> 1/t each point's reciprocal is also a point.
    """
    t_min, t_max = Fraction(t_min), Fraction(t_max)
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if steps == 1:
        return [t_min]
    ratio = float(t_max / t_min)
    pts: list[Fraction | None] = [None] * steps
    pts[0], pts[-1] = t_min, t_max
    for k in range(1, (steps - 1) // 2 + 1):
        approx = float(t_min) * ratio ** (k / (steps - 1))
        pts[k] = Fraction(approx).limit_denominator(4096)
        if steps - 1 - k != k:
            pts[steps - 1 - k] = t_min * t_max / pts[k]
    return [p for p in pts if p is not None]


def _row(args: tuple[Fraction, int, int]) -> GridRow:
    t, order, precision = args
    return GridRow(t, certify_A_negative(t, order, precision), certify_B_positive(t, order, precision))


def scan(
    t_min: Fraction,
    t_max: Fraction,
    steps: int,
    order: int = DEFAULT_ORDER,
    precision: int = DEFAULT_PRECISION,
    jobs: int = 1,
) -> GridReport:
    """Both certificates on a geometric grid; rows are ordered by t."""
    grid = geometric_grid(t_min, t_max, steps)
    args = [(t, order, precision) for t in grid]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_row, args))
    else:
        rows = [_row(a) for a in args]
    return GridReport(rows)
