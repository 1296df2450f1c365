from fractions import Fraction

import mpmath
import pytest

from magicineq.evaluator import (
    FAIL,
    PASS,
    AxisPoint,
    MissingMajorant,
    certify_A_negative,
    certify_B_positive,
    eval_axis,
    eval_series,
    geometric_grid,
    scan,
    tail_ratio,
)
from magicineq.forms import ENTRIES, Forms, registry
from magicineq.qseries import Majorant, QSeries

@pytest.fixture(autouse=True)
def _digits():
    with mpmath.workdps(120):
        yield


def mpf(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def inside(iv, value) -> bool:
    return mpf(iv.lo) <= value <= mpf(iv.hi)


def lambert(k: int, q2, terms: int = 400):
    return mpmath.fsum(n**k * q2**n / (1 - q2**n) for n in range(1, terms))


def oracle_values(t):
    """E2, E4, E6 from Lambert series and thetas from mpmath at q = exp(-pi t)."""
    q = mpmath.exp(-mpmath.pi * t)
    q2 = q * q
    e2 = 1 - 24 * lambert(1, q2)
    e4 = 1 + 240 * lambert(3, q2)
    e6 = 1 - 504 * lambert(5, q2)
    th2, th3, th4 = (mpmath.jtheta(k, 0, q) for k in (2, 3, 4))
    return e2, e4, e6, th2**4, th3**4, th4**4


def phi0(t):
    e2, e4, e6, *_ = oracle_values(t)
    return 1728 * (e2 * e4 - e6) ** 2 / (e4**3 - e6**2)


def psi_i(t):
    _, _, _, x, z, w = oracle_values(t)
    return 128 * ((z + w) / x**2 + (w - x) / z**2)


# the two terms reach 1e28 at t = 10 while B stays near 1e4, so work with ample digits
def A_oracle(t):
    with mpmath.workdps(110):
        t = mpf(t)
        return -(t**2) * phi0(1 / t) - 36 / mpmath.pi**2 * psi_i(t)


def B_oracle(t):
    with mpmath.workdps(110):
        t = mpf(t)
        return -(t**2) * phi0(1 / t) + 36 / mpmath.pi**2 * psi_i(t)


POINTS = [Fraction(1), Fraction(1, 2), Fraction(3), Fraction(1, 3), Fraction(7, 3), Fraction(10), Fraction(1, 8)]


class TestEvalSeries:
    @pytest.mark.parametrize("t", [Fraction(1), Fraction(3, 2), Fraction(5)])
    def test_against_oracle(self, t):
        fm = registry(64)
        e2, e4, e6, x, z, w = oracle_values(mpf(t))
        for name, ref in (("E2", e2), ("E4", e4), ("E6", e6), ("X", x), ("Z", z), ("W", w)):
            assert inside(eval_series(fm[name], t, 128), ref), name

    def test_delta_positive_and_e6_zero(self):
        assert eval_axis("DELTA_POLY", AxisPoint(Fraction(1))).lo > 0
        assert eval_axis("E6", AxisPoint(Fraction(1))).contains(0)

    def test_g_cap_bound(self):
        assert eval_axis("G_CAP", AxisPoint(Fraction(1))).hi <= 288

    def test_soundness_against_higher_order(self):
        lo, hi = registry(64), registry(256)
        for name in ENTRIES:
            if not lo[name].has_majorants():
                continue
            for t in (Fraction(1), Fraction(2)):
                ref = eval_series(hi[name], t, 256)
                got = eval_series(lo[name], t, 128)
                assert got.lo <= ref.lo and ref.hi <= got.hi, (name, t)

    def test_tail_dominance(self):
        fm = registry(64)
        for name in ENTRIES:
            if fm[name].has_majorants():
                assert tail_ratio(fm[name], Fraction(1)) < Fraction(1, 2**40), name

    def test_missing_majorant(self):
        with pytest.raises(MissingMajorant):
            eval_series(registry(32)["PSI_I"], Fraction(1))

    def test_rejects_nonpositive_t(self):
        with pytest.raises(ValueError):
            eval_series(registry(32)["E4"], Fraction(0))


class TestCertificates:
    @pytest.mark.parametrize("t", POINTS)
    def test_A_matches_oracle(self, t):
        c = certify_A_negative(t)
        assert c.status == PASS
        assert inside(c.value, A_oracle(t))

    @pytest.mark.parametrize("t", POINTS)
    def test_B_matches_oracle(self, t):
        c = certify_B_positive(t)
        assert c.status == PASS
        assert inside(c.value, B_oracle(t))

    def test_routing(self):
        assert certify_B_positive(Fraction(1, 2)).route == "reciprocal"
        assert certify_B_positive(Fraction(2)).route == "direct"
        d = certify_B_positive(Fraction(1), route="direct")
        r = certify_B_positive(Fraction(1), route="reciprocal")
        assert d.status == r.status == PASS
        assert d.value.intersects(r.value)

    def test_B_leading_margin_at_10(self):
        # g~ - f~ ~ (480 pi t - 720) q^2 as t grows
        c = certify_B_positive(Fraction(10))
        margin = c.enclosures["G_TILDE-F_TILDE(it)"]
        lead = (480 * mpmath.pi * 10 - 720) * mpmath.exp(-20 * mpmath.pi)
        assert abs(mpf(margin.mid) / lead - 1) < 1e-6

    def test_phi0_sign_mutation_fails(self):
        def flipped(N):
            fm = registry(N)
            neg = -fm["PHI0_NUM"]
            # -PHI0_NUM keeps a valid majorant; the sign certificate must now fail
            return {**{k: fm[k] for k in ("DELTA_POLY", "G_TILDE")}, "PHI0_NUM": neg}

        c = certify_A_negative(Fraction(1), forms=flipped)
        assert c.status == FAIL

    def test_monotone_refinement(self):
        for N in (64, 128, 256):
            assert certify_A_negative(Fraction(2), order=N).status == PASS

    def test_rejects_bad_t(self):
        with pytest.raises(ValueError):
            certify_A_negative(Fraction(0))
        with pytest.raises(ValueError):
            certify_B_positive(Fraction(-1))
        with pytest.raises(ValueError):
            certify_B_positive(Fraction(1), route="sideways")


class TestGrid:
    def test_endpoints_and_symmetry(self):
        g = geometric_grid(Fraction(1, 8), Fraction(8), 129)
        assert len(g) == 129 and g[0] == Fraction(1, 8) and g[-1] == 8
        assert g == sorted(g)
        assert all(g[k] * g[128 - k] == 1 for k in range(129))
        assert Fraction(1) in g

    def test_single_step(self):
        assert geometric_grid(Fraction(2), Fraction(3), 1) == [Fraction(2)]

    def test_scan_one_to_ten(self):
        rep = scan(Fraction(1), Fraction(10), 100)
        assert len(rep.rows) == 100 and rep.all_pass

    def test_scan_reciprocal_range(self):
        rep = scan(Fraction(1, 10), Fraction(1), 12)
        assert rep.all_pass
        assert {r.B.route for r in rep.rows} == {"reciprocal", "direct"}

    def test_scan_parallel_matches_serial(self):
        a = scan(Fraction(1, 2), Fraction(2), 5)
        b = scan(Fraction(1, 2), Fraction(2), 5, jobs=2)
        assert [r.A.to_dict() for r in a.rows] == [r.A.to_dict() for r in b.rows]

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            geometric_grid(Fraction(2), Fraction(1), 3)


def test_custom_forms_factory_used():
    # a registry whose DELTA_POLY is zero cannot certify anything
    def broken(N):
        fm = registry(N)
        zero = QSeries.constant([0], N, Majorant(Fraction(0), 0))
        return {"G_TILDE": fm["G_TILDE"], "F_TILDE": fm["F_TILDE"], "DELTA_POLY": zero}

    c = certify_B_positive(Fraction(2), forms=broken)
    assert c.status != PASS
    assert isinstance(registry(16), Forms)
