import random
from fractions import Fraction

import pytest

from magicineq.evaluator import FAIL, INCONCLUSIVE, PASS
from magicineq.forms import BASE_TABLES, DEFAULT_MAJORANTS, Forms, registry
from magicineq.qseries import AxisSeries, Majorant, QSeries, diff_t, to_axis
from magicineq.verifier import (
    IDENTITY_IDS,
    Certificate,
    check_cancellations,
    check_F1_derivative,
    check_H_typo,
    check_identities,
    check_lemma_constants,
    check_quadratic_positivity,
    check_signs,
    check_special_values,
    escalate,
    gtilde_oracle,
    lemma_constants,
)


def corrupted(order: int, name: str, n: int, delta: int) -> Forms:
    """Registry with one base coefficient shifted; the majorant is widened to stay valid."""
    base = registry(order).base(name)
    bad = base.with_coeff(n, base.coeff(n) + delta)
    C, s = DEFAULT_MAJORANTS[name]
    bad = QSeries(bad.components, order, {(0, 0): Majorant(C + abs(delta), s)})
    return Forms(order, tables={name: bad})


def statuses(certs):
    return {c.check_id: c.status for c in certs}


class TestIdentities:
    def test_all_pass_at_64(self):
        certs = check_identities(64)
        assert [c.check_id for c in certs] == list(IDENTITY_IDS)
        assert all(c.status == PASS for c in certs)
        assert all(c.evidence.get("residual_zero", True) for c in certs)

    def test_rejects_small_order(self):
        with pytest.raises(ValueError):
            check_identities(8)

    def test_theta3_perturbation_localized(self):
        certs = statuses(check_identities(32, corrupted(32, "THETA3", 9, 1)))
        assert certs["i1_jacobi"] == FAIL
        cert = check_identities(32, corrupted(32, "THETA3", 9, 1))[0]
        # Z = theta3^4 gains 4 at q^9, so X + W - Z loses 4
        assert cert.evidence["first_nonzero"] == 9 and cert.evidence["first_value"] == "-4"

    @pytest.mark.parametrize("name", BASE_TABLES)
    def test_each_base_table_is_watched(self, name):
        fm = corrupted(32, name, 6, 1)
        assert FAIL in statuses(check_identities(32, fm)).values()

    def test_unbuildable_series_is_a_failure(self):
        # E4 off by one at q^0 leaves F~ - 2 with a constant term, so F_CAP cannot be formed
        certs = {c.check_id: c for c in check_identities(32, corrupted(32, "E4", 0, 1))}
        assert certs["i11_f_decomposition"].status == FAIL
        assert "construction_error" in certs["i11_f_decomposition"].evidence

    def test_twenty_random_mutations(self):
        rng = random.Random(20240601)
        for _ in range(20):
            name = rng.choice(BASE_TABLES)
            n = rng.randrange(0, 32)
            delta = rng.choice([-3, -2, -1, 1, 2, 3])
            fm = corrupted(32, name, n, delta)
            got = list(statuses(check_identities(32, fm)).values())
            got += [c.status for c in check_signs(32, fm)]
            assert FAIL in got, (name, n, delta)


class TestSigns:
    def test_pass_at_200(self):
        certs = check_signs(200)
        assert all(c.status == PASS for c in certs)
        assert all("finite order" in c.evidence["scope"] for c in certs)

    def test_f2_derivative_form(self):
        fm = registry(64)
        seq = fm.sequences()
        d = diff_t(to_axis(fm["F2"]))
        # n = 3 summand lives at exponent 4
        a, b = seq.alpha[3], seq.beta[3]
        assert d.poly(4) == {(3, 2): 4 * a / 18, (2, 1): -a / 9, (1, 0): 8 * b}

    def test_negative_coefficient_fails(self):
        # make some b_n = coefficient of g negative: g = X^2(...) starts at q^3
        fm = corrupted(32, "THETA2_4", 1, -40)
        certs = statuses(check_signs(32, fm))
        assert FAIL in certs.values()


class TestCancellations:
    def test_pass(self):
        c = check_cancellations()
        assert c.status == PASS
        assert c.evidence["alpha2"] == "518400" and c.evidence["delta2"] == "185760"

    def test_mutated_e4_breaks_it(self):
        assert check_cancellations(corrupted(128, "E4", 2, 1)).status == FAIL


class TestF1Derivative:
    def test_pass(self):
        c = check_F1_derivative(64)
        assert c.status == PASS
        assert c.evidence["exponent_2"] == {"(3, 2)": "57600", "(2, 1)": "-305280", "(1, 0)": "371520"}

    def test_zero_series(self):
        assert diff_t(to_axis(QSeries.zero(8))).is_zero()

    def test_constant_term_derivative(self):
        # T-linear constant term: d/dt (480 p T) = 480 p
        d = diff_t(AxisSeries({0: {(1, 1): 480}}, 4))
        assert d.poly(0) == {(1, 0): 480}


class TestQuadratic:
    def test_pass_at_64(self):
        c = check_quadratic_positivity(64)
        assert c.status == PASS
        lo, hi = (Fraction(x) for x in c.evidence["enclosure"])
        # 636^2 - 480*774 = 32976 and 480 e^{2 pi} > 256800
        assert hi < 32976 - 256800

    def test_destabilising_mutations_fail(self):
        assert check_quadratic_positivity(64, const=-774000).status == FAIL
        assert check_quadratic_positivity(64, lin=-6360).status == FAIL

    def test_larger_constant_keeps_sign(self):
        # raising the constant only makes the discriminant more negative
        assert check_quadratic_positivity(64, const=7740000).status == PASS

    def test_precision_floor(self):
        with pytest.raises(ValueError):
            check_quadratic_positivity(32)


class TestLemmaConstants:
    def test_values(self):
        certs = check_lemma_constants(128)
        assert [c.status for c in certs] == [PASS, PASS, PASS]
        v = lemma_constants(128)
        assert 13130 < v["L0"].lo and v["L0"].hi < 13131 and v["L0"].width <= Fraction(1, 100)
        assert 287 < v["L1"].lo and v["L1"].hi < 288
        assert 468 < v["L2"].lo and v["L2"].hi < 469

    def test_l2_matches_series(self):
        c = check_lemma_constants(128)[2]
        assert c.evidence["closed_form_matches_series"]
        # the variant without the factor pi on 123840 e^{-2 pi} does not
        assert Fraction(c.evidence["without_pi_factor"][1]) < 0

    def test_monotone_in_precision(self):
        for p in (64, 96, 256):
            assert all(c.status == PASS for c in check_lemma_constants(p))


class TestSpecialValues:
    def test_all_pass(self):
        certs = check_special_values(64, 128)
        assert all(c.status == PASS for c in certs), statuses(certs)
        e6 = next(c for c in certs if c.check_id == "special_E6_at_i_zero")
        assert e6.evidence["width"] <= 1e-10

    def test_corrupted_table_fails(self):
        fm = corrupted(64, "E2", 2, 1)
        st = statuses(check_special_values(64, 128, fm))
        assert st["special_E2_at_i"] == FAIL

    def test_low_order_inconclusive_not_fail(self):
        # at N = 4 the tail is far wider than 1e-10 but still overlaps the closed form
        st = statuses(check_special_values(4, 128))
        assert FAIL not in st.values()
        assert INCONCLUSIVE in st.values()


class TestHTypo:
    def test_values(self):
        c = check_H_typo()
        assert c.status == PASS
        assert c.evidence["h_q1"] == "10240"
        assert c.evidence["h_q3"] == "1007616" == c.evidence["minus_d5"]
        assert c.evidence["printed_q3"] == "10007616"
        assert c.evidence["printed_matches"] is False

    def test_oracle_independent_of_library(self):
        d = gtilde_oracle(10)
        assert d[:6] == [2, 0, 240, -10240, 134640, -1007616]
        assert d == registry(32)["G_TILDE"].constant_coeffs()[:10]


class TestEscalate:
    def test_doubles_until_decided(self):
        seen = []

        def check(p):
            seen.append(p)
            return Certificate("x", PASS if p >= 256 else INCONCLUSIVE)

        assert escalate(check, 64).status == PASS
        assert seen == [64, 128, 256]

    def test_gives_up_at_ceiling(self):
        c = escalate(lambda p: Certificate("x", INCONCLUSIVE, params={"precision": p}), 512)
        assert c.status == INCONCLUSIVE and c.params["precision"] == 1024
