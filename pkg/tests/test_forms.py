import threading

import pytest

from magicineq.forms import (
    ENTRIES,
    Forms,
    divisor_sums,
    e4_derivative_series,
    eisenstein,
    registry,
    sequences,
    theta,
)
from magicineq.qseries import CoeffPoly, QSeries

P2 = CoeffPoly.monomial(2, 0)


def sigma(k: int, n: int) -> int:
    return sum(d**k for d in range(1, n + 1) if n % d == 0)


@pytest.fixture(scope="module")
def fm():
    return registry(64)


class TestBase:
    def test_divisor_sieve(self):
        assert divisor_sums(50, 3) == [0] + [sigma(3, n) for n in range(1, 51)]

    def test_eisenstein(self):
        assert eisenstein(2, 8).coeff(2) == -24
        assert eisenstein(4, 8).coeff(4) == 2160
        assert eisenstein(6, 8).coeff(0) == 1
        for k in (2, 4, 6):
            e = eisenstein(k, 40)
            assert all(e.coeff(n).is_zero() for n in range(1, 40, 2))

    def test_thetas(self):
        assert theta("THETA3", 10).constant_coeffs() == [1, 2, 0, 0, 2, 0, 0, 0, 0, 2]
        assert theta("THETA4", 10).constant_coeffs() == [1, -2, 0, 0, 2, 0, 0, 0, 0, -2]
        assert theta("THETA2_4", 7).constant_coeffs() == [0, 16, 0, 64, 0, 96, 0]

    def test_theta2_fourth_enumeration(self):
        # (sum over all integers n of q^{(n+1/2)^2})^4 by enumerating odd squares
        order = 40
        odd = [m for m in range(-13, 14) if m % 2]
        ref = [0] * order
        for a in odd:
            for b in odd:
                for c in odd:
                    for d in odd:
                        s = (a * a + b * b + c * c + d * d) // 4
                        if s < order:
                            ref[s] += 1
        assert theta("THETA2_4", order).constant_coeffs() == ref


class TestGolden:
    def test_f(self, fm):
        assert [(n, c) for n, c in fm["F"].nonzero()][:3] == [
            (4, P2 * 28800), (6, P2 * 1036800), (8, P2 * 14169600)]

    def test_g(self, fm):
        assert [(n, c) for n, c in fm["G"].nonzero()][:3] == [(3, 20480), (5, 2015232), (7, 41656320)]

    def test_f_tilde(self, fm):
        c = fm["F_TILDE"]
        assert c.coeff(0) == 2
        assert c.coeff(2) == CoeffPoly({(1, 1): 480, (0, 0): 960})
        assert c.coeff(4) == CoeffPoly({(2, 2): 28800, (1, 1): 123840, (0, 0): 123840})
        assert c.coeff(6) == CoeffPoly({(2, 2): 1036800, (1, 1): 3150720, (0, 0): 2100480})

    def test_g_tilde(self, fm):
        assert fm["G_TILDE"].constant_coeffs()[:6] == [2, 0, 240, -10240, 134640, -1007616]

    def test_sequences(self):
        s = sequences(32)
        assert (s.alpha[2], s.beta[2], s.delta[1], s.delta[2]) == (518400, 61920, 720, 185760)
        assert s.alpha[2] == 720**2

    def test_alpha_from_square(self, fm):
        assert (fm["E2E4_E6"] * fm["E2E4_E6"]).coeff(4) == 518400


class TestStructure:
    def test_order_stability(self):
        lo, hi = registry(32), registry(64)
        for name in ENTRIES:
            assert hi[name].truncate(lo[name].order) == lo[name], name

    def test_parity(self, fm):
        g = fm["G"]
        assert all(g.coeff(n).is_zero() for n in range(0, 64, 2))
        assert g.valuation() == 3

    def test_psi_times_delta(self, fm):
        # psi_I * Delta = 864 g~, and the entry stores q^2 psi_I
        lhs = fm["PSI_I"] * fm["DELTA_POLY"]
        rhs = (fm["G_TILDE"] * 864).mul_q(2)
        n = min(lhs.order, rhs.order)
        assert lhs.truncate(n) == rhs.truncate(n)

    def test_e4_derivative(self):
        d = e4_derivative_series(30)
        assert d.coeff(2) == 720 and d.coeff(4) == 720 * 2 * 9

    def test_unknown_entry(self, fm):
        with pytest.raises(KeyError):
            fm["NOPE"]

    def test_table_override(self):
        bad = theta("THETA3", 32).with_coeff(4, 3)
        fm = Forms(32, tables={"THETA3": bad})
        assert fm["Z"] != registry(32)["Z"]
        with pytest.raises(KeyError):
            Forms(32, tables={"F": QSeries.one(32)})

    def test_concurrent_readers(self):
        fm = Forms(40)
        out = []
        threads = [threading.Thread(target=lambda: out.append(fm["G_TILDE"])) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(x is out[0] for x in out)

    def test_z_dependence_only_where_expected(self, fm):
        for name in ("E2", "E4", "G", "G_TILDE", "H_FN", "DELTA_POLY"):
            assert fm[name].is_constant()
        assert set(fm["F_TILDE"].components) == {(0, 0), (1, 1), (2, 2)}
        assert fm["F"].components.keys() == {(2, 0)}
        assert fm["F1"].coeff(0) == CoeffPoly.monomial(1, 1, -480)
        assert fm["F1"].coeff(2) == CoeffPoly({(2, 2): -28800, (1, 1): -123840, (0, 0): -123840})
        assert fm["F3"].coeff(1).is_zero()
