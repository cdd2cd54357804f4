"""Tests for the brute-force oracle: lumped enumeration and equality patterns."""

from fractions import Fraction

import pytest

from pairwords.core.geometric import GeomParams
from pairwords.core.oracle import (
    LUMP,
    LumpedAlphabet,
    avoid_prob_enum,
    joint_indicator_expectation,
    mean_total_enum,
    pattern_moments,
    restricted_growth_strings,
)
from pairwords.core.transfer import PairSet
from pairwords.exceptions import BudgetExceededError, DomainError
from pairwords.utils.config_loader import OracleSettings, Settings


def avoid_identical_polynomial(P: Fraction) -> Fraction:
    """P(no (i,i) in five letters) as a polynomial in P_i."""
    return 1 - 4 * P**2 + 3 * P**3 + P**4 - P**5


class TestLumpedAlphabet:
    def test_lump_carries_the_rest(self, half):
        alphabet = LumpedAlphabet.for_pairs(half, PairSet.of((1, 2)), exact=True)
        assert LUMP in alphabet.symbols
        assert sum(alphabet.weights) == 1
        assert alphabet.size == 3


class TestAvoidProbEnum:
    def test_thirteen_of_32_binary_words(self, half):
        assert avoid_prob_enum(half, [(1, 1)], 5, exact=True) == Fraction(13, 32)

    def test_polynomial_in_letter_probability(self, quarter):
        value = avoid_prob_enum(quarter, [(1, 1)], 5, exact=True)
        assert value == avoid_identical_polynomial(Fraction(1, 4))

    def test_named_letters_with_weights(self):
        value = avoid_prob_enum(None, [("i", "i")], 5, weights={"i": 0.3})
        assert value == pytest.approx(float(avoid_identical_polynomial(Fraction(3, 10))))

    @pytest.mark.parametrize("n", [0, 1])
    def test_short_words_avoid_everything(self, half, n):
        assert avoid_prob_enum(half, [(1, 1)], n) == 1.0

    def test_empty_pair_set(self, half):
        assert avoid_prob_enum(half, [], 6, exact=True) == 1

    def test_exact_mode_limits(self, half):
        with pytest.raises(DomainError):
            avoid_prob_enum(half, [(1, 1)], 11, exact=True)
        with pytest.raises(DomainError):
            avoid_prob_enum(half, [(1, 2), (3, 4)], 4, exact=True)

    def test_budget(self, half):
        settings = Settings(oracle=OracleSettings(enumeration_budget=10))
        with pytest.raises(BudgetExceededError) as info:
            avoid_prob_enum(half, [(1, 2)], 6, settings=settings)
        assert info.value.budget == 10

    def test_negative_length(self, half):
        with pytest.raises(DomainError):
            avoid_prob_enum(half, [(1, 1)], -1)


class TestJointIndicator:
    def test_single_hit_is_occurrence_probability(self, half):
        value = joint_indicator_expectation(half, [(1, 1)], [], 5, exact=True)
        assert value == Fraction(19, 32)

    def test_hit_and_miss_partition(self, quarter):
        n = 6
        both = joint_indicator_expectation(quarter, [(1, 2), (2, 1)], [], n)
        first_only = joint_indicator_expectation(quarter, [(1, 2)], [(2, 1)], n)
        first = joint_indicator_expectation(quarter, [(1, 2)], [], n)
        assert both + first_only == pytest.approx(first, abs=1e-14)


class TestMeanTotalEnum:
    def test_matches_pattern_moments(self, half):
        exact = pattern_moments(half, 4)
        for which in ("x1", "x2", "x3"):
            result = mean_total_enum(half, 4, which, tol=1e-12)
            assert result.value == pytest.approx(exact[which], abs=1e-11)
            assert result.tail_bound < 1e-12

    def test_rejects_unknown_statistic(self, half):
        with pytest.raises(DomainError):
            mean_total_enum(half, 4, "x4")


class TestPatterns:
    def test_bell_numbers(self):
        assert [sum(1 for _ in restricted_growth_strings(n)) for n in range(1, 6)] == [
            1,
            2,
            5,
            15,
            52,
        ]

    def test_three_letters(self, half):
        moments = pattern_moments(half, 3, exact=True)
        assert moments["x2"] == Fraction(13, 7)
        assert moments["x2_sq"] == Fraction(25, 7)
        assert moments["x1"] == Fraction(11, 21)

    def test_four_letters(self, half):
        moments = pattern_moments(half, 4, exact=True)
        assert moments["x2"] == Fraction(841, 315)
        assert moments["x2_sq"] == Fraction(2357, 315)

    def test_x3_is_difference(self, quarter):
        moments = pattern_moments(quarter, 6)
        assert moments["x3"] == pytest.approx(moments["x2"] - moments["x1"])

    def test_length_limit(self, half):
        with pytest.raises(DomainError):
            pattern_moments(half, 9)

    def test_geometric_parameter_is_exact(self):
        moments = pattern_moments(GeomParams(p="1/3"), 3, exact=True)
        assert isinstance(moments["x2"], Fraction)
