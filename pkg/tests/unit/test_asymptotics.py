"""Tests for the Mellin-form expansions of means, variances and cumulants."""

import math

import pytest

from pairwords.core.asymptotics import (
    S1,
    F1,
    Constants,
    F1_majorant,
    F1_prime_at_0,
    G_direct,
    G_hat,
    G_hat_direct,
    G_sum,
    Gt_direct,
    Gt_sum,
    Vj,
    Vj_direct,
    classify_covariance,
    cov_main_term,
    cumulant,
    cumulant_coefficients,
    mean_x1,
    poisson_pair_pmf,
    var_x1,
    var_x2,
    var_x3,
)
from pairwords.core.geometric import GeomParams
from pairwords.exceptions import DomainError


class TestConstants:
    def test_values(self, quarter):
        c = Constants.of(quarter, 10_000)
        assert c.L == pytest.approx(-math.log(0.75))
        assert c.chi == pytest.approx(2j * math.pi / c.L)
        assert c.alpha == pytest.approx(0.5625 / 0.4375)
        assert c.i_star == pytest.approx(math.log(10_000 * 0.0625 / 0.5625) / (2 * c.L))


class TestHarmonicSums:
    @pytest.mark.parametrize("x", [50.0, 1e3, 1e6])
    def test_g_mellin_form_is_exact(self, params, x):
        assert G_sum(x, params).value == pytest.approx(G_direct(x, params), rel=1e-10)

    @pytest.mark.parametrize("x", [50.0, 1e3, 1e6])
    def test_gt_mellin_form_is_exact(self, params, x):
        assert Gt_sum(x, params).value == pytest.approx(Gt_direct(x, params), rel=1e-10)

    def test_periodic_part_is_real(self, two_thirds):
        result = Gt_sum(1e4, two_thirds)
        assert result.imag_residue < 1e-10
        assert result.periodic != 0.0

    def test_rejects_nonpositive_argument(self, half):
        with pytest.raises(DomainError):
            G_sum(0.0, half)


class TestF1:
    def test_vanishes_at_zero(self, quarter):
        assert F1(0, quarter) == 0

    def test_bounded_by_majorant(self, half):
        s = Constants.of(half).chi
        assert abs(F1(s, half)) <= F1_majorant(s, half)

    def test_rejects_right_half_plane(self, half):
        with pytest.raises(DomainError):
            F1(1.5, half)

    def test_derivative_matches_difference_quotient(self, half):
        h = 1e-6
        slope = (F1(h, half, tol=1e-14) - F1(-h, half, tol=1e-14)) / (2 * h)
        assert slope.real == pytest.approx(F1_prime_at_0(half), rel=1e-6)

    def test_small_q_limit(self):
        q = 0.001
        value = 2 * (1 - q) * F1_prime_at_0(GeomParams(p=1 - q))
        assert value == pytest.approx(2 * math.log(2), rel=0.01)

    def test_large_q_limit(self):
        q = 0.999
        value = 2 * (1 - q) * F1_prime_at_0(GeomParams(p=1 - q))
        assert value == pytest.approx(4 * math.log(2), rel=0.02)

    def test_g_hat_against_triple_sum(self, quarter):
        assert G_hat(1e6, quarter).value == pytest.approx(G_hat_direct(1e6, quarter), abs=1e-3)
        assert G_hat(1e4, quarter).value == pytest.approx(G_hat_direct(1e4, quarter), abs=0.1)


class TestMoments:
    def test_mean_x1(self, quarter):
        assert mean_x1(10_000, quarter).value == pytest.approx(12.692, abs=1e-3)

    def test_var_x1(self, quarter):
        result = var_x1(10_000, quarter)
        assert result.smooth == pytest.approx(math.log(2) / (2 * -math.log(0.75)))
        assert result.value == pytest.approx(1.205, abs=1e-3)

    def test_variances_differ_by_s1(self, params):
        n = 1e5
        difference = var_x2(n, params).value - var_x3(n, params).value
        assert difference == pytest.approx(S1(n, params).value, abs=1e-9)

    def test_rejects_short_words(self, quarter):
        with pytest.raises(DomainError):
            mean_x1(0, quarter)


class TestCumulants:
    def test_coefficient_rows(self):
        assert cumulant_coefficients(1) == [1]
        assert cumulant_coefficients(2) == [1, -1]
        assert cumulant_coefficients(3) == [1, -3, 2]
        assert cumulant_coefficients(4) == [1, -7, 12, -6]

    def test_second_cumulant_is_variance(self, quarter):
        n = 1e4
        assert cumulant(n, 2, quarter).value == pytest.approx(S1(n, quarter).value, abs=1e-12)

    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_vj_against_direct_sum(self, quarter, j):
        assert Vj(1e4, j, quarter).value == pytest.approx(Vj_direct(1e4, j, quarter), abs=1e-8)

    def test_rejects_order_zero(self):
        with pytest.raises(DomainError):
            cumulant_coefficients(0)


class TestCovarianceCases:
    @pytest.mark.parametrize(
        "pair1, pair2, case",
        [
            ((1, 1), (2, 2), "matching"),
            ((1, 1), (1, 2), "6a"),
            ((1, 1), (2, 1), "6b"),
            ((1, 1), (2, 3), "3"),
            ((1, 2), (2, 1), "5"),
            ((1, 2), (2, 3), "1"),
            ((2, 3), (1, 2), "1"),
            ((1, 2), (1, 3), "2a"),
            ((1, 3), (2, 3), "2b"),
            ((1, 2), (3, 4), "4"),
        ],
    )
    def test_classification(self, pair1, pair2, case):
        assert classify_covariance(pair1, pair2)[0] == case

    def test_same_pair_rejected(self):
        with pytest.raises(DomainError):
            classify_covariance((1, 2), (1, 2))

    def test_only_chain_and_swap_have_main_terms(self, quarter):
        assert cov_main_term(quarter, (1, 2), (3, 4), 100).main == 0.0
        assert cov_main_term(quarter, (1, 2), (2, 3), 100).main > 0.0
        assert cov_main_term(quarter, (1, 2), (2, 1), 100).main > 0.0


class TestPoissonLaw:
    def test_single_occurrence(self):
        params = GeomParams(p=0.05)
        lam = 200 * 0.05 * 0.0475
        assert poisson_pair_pmf(200, 1, 2, 1, params) == pytest.approx(lam * math.exp(-lam))
        assert poisson_pair_pmf(200, 1, 2, 1, params) == pytest.approx(0.2954, abs=1e-4)
