"""Tests for the tabulated avoidance GFs and the exact moments built on them."""

import numpy as np
import pytest

from pairwords.core.asymptotics import cov_main_term
from pairwords.core.exactgf import (
    classify_joint,
    cubic_roots,
    exact_covariance,
    joint_case,
    joint_prob,
    mean_total,
    partial_fraction_coefficient,
    prob_pair_occurs,
    second_moment_total,
    table_a,
    table_b,
    table_c,
    table_d,
    table_e,
    table_f,
    table_g,
    table_h,
)
from pairwords.core.genfunc import RationalGF
from pairwords.core.oracle import joint_indicator_expectation, pattern_moments
from pairwords.core.transfer import PairSet, avoid_prob_matrix
from pairwords.exceptions import BudgetExceededError, DomainError
from pairwords.utils.config_loader import ExactSettings, Settings


class TestClassifyJoint:
    @pytest.mark.parametrize(
        "pair1, pair2, label",
        [
            ((1, 1), (1, 1), "B"),
            ((1, 2), (1, 2), "A"),
            ((1, 2), (3, 4), "C"),
            ((1, 2), (1, 3), "C"),
            ((1, 1), (1, 2), "D"),
            ((2, 1), (1, 1), "D"),
            ((1, 1), (2, 2), "E"),
            ((1, 1), (2, 3), "F"),
            ((1, 2), (2, 3), "G"),
            ((2, 3), (1, 2), "G"),
            ((1, 2), (2, 1), "H"),
        ],
    )
    def test_labels(self, pair1, pair2, label):
        assert classify_joint(pair1, pair2) == label


class TestTables:
    @pytest.mark.parametrize(
        "pair1, pair2",
        [
            ((1, 2), (3, 4)),
            ((1, 2), (1, 3)),
            ((1, 1), (1, 2)),
            ((2, 1), (1, 1)),
            ((1, 1), (2, 2)),
            ((1, 1), (2, 3)),
            ((1, 2), (2, 3)),
            ((3, 1), (1, 2)),
            ((1, 2), (2, 1)),
        ],
    )
    def test_joint_gf_matches_transfer_matrix(self, quarter, pair1, pair2):
        gf = joint_case(quarter, pair1, pair2).gf
        pairs = PairSet.of(pair1, pair2)
        for n in range(0, 13):
            assert gf.coefficient(n) == pytest.approx(
                avoid_prob_matrix(quarter, pairs, n), abs=1e-13
            )

    def test_single_identical_pair(self, half):
        assert table_b(0.5).coefficient(5) == pytest.approx(13 / 32)
        assert prob_pair_occurs(half, 1, 1, 5) == pytest.approx(19 / 32)

    @pytest.mark.parametrize("n", [0, 1])
    def test_no_pair_in_short_words(self, half, n):
        assert prob_pair_occurs(half, 1, 2, n) == 0.0

    def test_partial_fractions(self):
        gf = table_a(0.3, 0.2)
        closed = partial_fraction_coefficient(gf, 50)
        assert closed == pytest.approx(gf.coefficients(51)[50], rel=1e-12)

    @pytest.mark.parametrize(
        "build",
        [
            lambda a, b, c: table_a(a, b),
            lambda a, b, c: table_b(a),
            lambda a, b, c: table_c(a * b + c * c),
            lambda a, b, c: table_d(a, b),
            lambda a, b, c: table_e(a, b),
            lambda a, b, c: table_f(a, b, c),
            lambda a, b, c: table_g(a, b, c),
            lambda a, b, c: table_h(a, b),
        ],
        ids=list("abcdefgh"),
    )
    def test_closed_form_matches_recurrence(self, build):
        rng = np.random.default_rng(4_242)
        checked = 0
        for _ in range(100):
            gf = build(*rng.uniform(0.01, 0.3, size=3))
            n = int(rng.integers(0, 41))
            closed = partial_fraction_coefficient(gf, n)
            if closed is None:
                continue
            assert closed == pytest.approx(gf.coefficients(n + 1)[n], abs=1e-10)
            checked += 1
        assert checked >= 90

    def test_partial_fractions_skip_improper(self):
        assert partial_fraction_coefficient(table_h(0.2, 0.2), 10) is not None
        assert partial_fraction_coefficient(RationalGF((1.0, 1.0), (1.0, -0.5)), 10) is None


class TestCubicRoots:
    def test_known_roots(self):
        result = cubic_roots(1.0, -6.0, 11.0, -6.0)
        np.testing.assert_allclose(np.real(result.roots), [1.0, 2.0, 3.0], atol=1e-12)
        assert not result.clustered

    def test_degree_drops(self):
        result = cubic_roots(0.0, 1.0, -3.0, 2.0)
        np.testing.assert_allclose(np.real(result.roots), [1.0, 2.0], atol=1e-12)

    def test_double_root_is_flagged(self):
        assert cubic_roots(0.0, 1.0, -2.0, 1.0).clustered

    def test_zero_polynomial(self):
        with pytest.raises(DomainError):
            cubic_roots(0.0, 0.0, 0.0, 0.0)


class TestJointMoments:
    @pytest.mark.parametrize(
        "pair1, pair2", [((1, 1), (2, 2)), ((1, 2), (2, 1)), ((1, 2), (2, 3)), ((1, 1), (1, 2))]
    )
    def test_joint_prob_matches_inclusion_exclusion(self, two_thirds, pair1, pair2):
        for n in (2, 5, 8):
            expected = joint_indicator_expectation(two_thirds, [pair1, pair2], [], n)
            assert joint_prob(two_thirds, pair1, pair2, n) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_identical_pairs_are_negatively_correlated(self, params, n):
        assert exact_covariance(params, (1, 1), (2, 2), n) <= 1e-15

    def test_swapped_pair_covariance(self):
        Pi = Pr = 0.2
        n = 20
        a12 = table_h(Pi, Pr).coefficient(n)
        a1 = table_a(Pi, Pr).coefficient(n)
        cov = a12 - a1 * a1
        assert cov == pytest.approx(0.04678, abs=5e-4)
        term = cov_main_term(None, ("i", "r"), ("r", "i"), n, weights={"i": Pi, "r": Pr})
        assert term.case == "5"
        assert term.main == pytest.approx(0.0761, abs=1e-4)
        assert term.bound == pytest.approx(0.1659, abs=1e-4)
        assert abs(cov - term.main) <= term.bound


class TestTotals:
    def test_mean_matches_patterns(self, half):
        result = mean_total(half, 4, tol=1e-12)
        expected = pattern_moments(half, 4)
        assert result.value == pytest.approx(expected["x2"], abs=1e-11)
        assert result.parts["diagonal"] == pytest.approx(expected["x1"], abs=1e-11)
        assert result.parts["off_diagonal"] == pytest.approx(expected["x3"], abs=1e-11)
        assert result.tail_bound < 1e-12

    def test_mean_below_smooth_approximation(self, quarter):
        diagonal = mean_total(quarter, 10_000, tol=1e-9).parts["diagonal"]
        assert diagonal == pytest.approx(12.692, abs=0.03)
        assert diagonal < 12.692

    def test_second_moment_matches_patterns(self, two_thirds):
        result = second_moment_total(two_thirds, 4, tol=1e-10)
        expected = pattern_moments(two_thirds, 4)["x2_sq"]
        assert result.value == pytest.approx(expected, abs=1e-9)

    def test_second_moment_budget(self, two_thirds):
        settings = Settings(exact=ExactSettings(max_quadruples=1))
        with pytest.raises(BudgetExceededError):
            second_moment_total(two_thirds, 4, settings=settings)
