"""Tests for rational generating functions, the cluster matrix and psi."""

from fractions import Fraction

import numpy as np
import pytest
from numpy.polynomial import Chebyshev, Polynomial
from numpy.polynomial.chebyshev import chebfit

from pairwords.core.exactgf import table_a, table_b, table_d, table_e, table_f
from pairwords.core.genfunc import (
    C_of_v,
    PsiSeries,
    RationalGF,
    avoidance_gf,
    avoidance_series_psi,
    bareiss_det,
    cluster_matrix,
    lambda_of_v,
    poly_exact_div,
    poly_mul,
    psi,
    psi_series,
)
from pairwords.core.geometric import GeomParams
from pairwords.core.transfer import PairSet, avoid_prob_matrix, dominant_eigen
from pairwords.exceptions import DomainError


class TestPolynomials:
    def test_exact_division_inverts_multiplication(self):
        a = [Fraction(1), Fraction(-2), Fraction(3)]
        b = [Fraction(2), Fraction(5)]
        assert poly_exact_div(poly_mul(a, b), b) == a

    def test_determinant_of_polynomial_matrix(self):
        # [[1 + z, z], [2z, 1]] has determinant 1 + z - 2 z^2
        matrix = [[[1, 1], [0, 1]], [[0, 2], [1]]]
        det = [Fraction(c) for c in bareiss_det(matrix)]
        assert det == [1, 1, -2]


class TestRationalGF:
    def test_normalizes_constant_term(self):
        gf = RationalGF((2.0,), (2.0, -1.0))
        assert gf.denominator == (1.0, -0.5)
        assert gf.coefficients(4) == [1.0, 0.5, 0.25, 0.125]

    def test_rejects_zero_constant_term(self):
        with pytest.raises(DomainError):
            RationalGF((1.0,), (0.0, 1.0))

    def test_fast_path_matches_recurrence(self):
        gf = table_a(0.01, 0.01)
        n = 20_000
        assert gf.coefficient(n) == pytest.approx(gf.coefficients(n + 1)[n], rel=1e-9)

    def test_negative_index(self):
        with pytest.raises(DomainError):
            table_b(0.3).coefficient(-1)


class TestClusterMatrix:
    def test_entries(self, quarter):
        pairs = PairSet.of((1, 1), (1, 2))
        cm = cluster_matrix(quarter, pairs)
        assert cm.index == (1, 2)
        P1, P2 = quarter.letter_prob(1), quarter.letter_prob(2)
        np.testing.assert_allclose(cm.as_array(), [[P1, P2], [0.0, 0.0]])

    def test_psi_values(self, half):
        pairs = PairSet.of((1, 1))
        assert psi(half, pairs, 1) == pytest.approx(0.5)
        assert psi(half, pairs, 2) == pytest.approx(0.25)
        assert psi_series(half, pairs, 4).values == pytest.approx((0.5, 0.25, 0.125, 0.0625))

    def test_psi_index(self, half):
        with pytest.raises(DomainError):
            psi(half, PairSet.of((1, 1)), 0)
        with pytest.raises(DomainError):
            PsiSeries((0.5,))[2]


class TestAvoidanceGF:
    def test_exact_single_identical_pair(self, half):
        gf = avoidance_gf(half, PairSet.of((1, 1)), exact=True)
        assert gf.numerator == (1, Fraction(1, 2))
        assert gf.denominator == (1, Fraction(-1, 2), Fraction(-1, 4))
        assert gf.coefficient(5) == Fraction(13, 32)

    @pytest.mark.parametrize(
        "pairs, table",
        [
            (((1, 1),), lambda P: table_b(P[1])),
            (((1, 2),), lambda P: table_a(P[1], P[2])),
            (((1, 1), (1, 3)), lambda P: table_d(P[1], P[3])),
            (((1, 1), (2, 2)), lambda P: table_e(P[1], P[2])),
            (((2, 2), (1, 3)), lambda P: table_f(P[2], P[1], P[3])),
        ],
    )
    def test_agrees_with_tables(self, quarter, pairs, table):
        P = {i: quarter.letter_prob(i) for i in range(1, 4)}
        general = avoidance_gf(quarter, PairSet.of(*pairs)).coefficients(15)
        tabulated = table(P).coefficients(15)
        np.testing.assert_allclose(general, tabulated, atol=1e-13)

    def test_named_three_pair_set(self):
        pairs = PairSet.of(("k", "k"), ("k", "l"), ("l", "k"))
        Pk, Pl = 0.2, 0.15
        gf = avoidance_gf(None, pairs, weights={"k": Pk, "l": Pl})
        np.testing.assert_allclose(gf.numerator, [1.0, Pk, -Pk * Pl], atol=1e-14)
        np.testing.assert_allclose(
            gf.denominator,
            [1.0, -(1 - Pk), -Pk * (1 - Pk - Pl), Pk * Pl * (1 - Pk - Pl)],
            atol=1e-14,
        )

    @pytest.mark.parametrize("n", [0, 1, 4, 12, 30])
    def test_coefficients_are_avoidance_probabilities(self, two_thirds, n):
        pairs = PairSet.of((1, 2), (2, 3), (3, 1))
        gf = avoidance_gf(two_thirds, pairs)
        assert gf.coefficient(n) == pytest.approx(
            avoid_prob_matrix(two_thirds, pairs, n), abs=1e-13
        )

    def test_requires_positive_lump(self):
        with pytest.raises(DomainError):
            avoidance_gf(None, PairSet.of(("a", "b")), weights={"a": 0.5, "b": 0.5})


class TestPsiForm:
    def test_leading_coefficients(self, quarter):
        pairs = PairSet.of((1, 1), (1, 2), (2, 3))
        values = psi_series(quarter, pairs, 6)
        from_psi = avoidance_series_psi(values)
        from_gf = avoidance_gf(quarter, pairs).coefficients(7)
        np.testing.assert_allclose(from_psi, from_gf, atol=1e-14)

    def test_symbolic_low_orders(self):
        p2, p3, p4 = Fraction(1, 5), Fraction(1, 7), Fraction(1, 11)
        coefficients = avoidance_series_psi(PsiSeries((Fraction(1, 2), p2, p3, p4)))
        assert coefficients == [
            1,
            1,
            1 - p2,
            1 - 2 * p2 + p3,
            1 - 3 * p2 + 2 * p3 + p2 * p2 - p4,
        ]

    @pytest.mark.parametrize("seed", range(50))
    def test_low_orders_at_random_points(self, seed):
        rng = np.random.default_rng(7_000 + seed)
        params = GeomParams(p=float(rng.uniform(0.05, 0.95)))
        letter_pairs = [(a, b) for a in range(1, 5) for b in range(1, 5)]
        chosen = rng.choice(len(letter_pairs), size=int(rng.integers(1, 5)), replace=False)
        pairs = PairSet.of(*(letter_pairs[k] for k in chosen))
        values = psi_series(params, pairs, 4)
        p2, p3, p4 = values[2], values[3], values[4]
        expected = [1, 1, 1 - p2, 1 - 2 * p2 + p3, 1 - 3 * p2 + 2 * p3 + p2 * p2 - p4]
        coefficients = avoidance_series_psi(values)
        np.testing.assert_allclose(coefficients, expected, rtol=0, atol=1e-12)
        direct = [avoid_prob_matrix(params, pairs, n) for n in range(5)]
        np.testing.assert_allclose(coefficients, direct, rtol=0, atol=1e-12)


class TestScaledSystem:
    def test_endpoints(self, quarter):
        pairs = PairSet.of((1, 2), (2, 2))
        assert lambda_of_v(quarter, pairs, 0.0) == 1.0
        assert C_of_v(quarter, pairs, 0.0) == 1.0
        lam, c1 = dominant_eigen(quarter, pairs)
        assert lambda_of_v(quarter, pairs, 1.0) == pytest.approx(lam, abs=1e-13)
        assert C_of_v(quarter, pairs, 1.0) == pytest.approx(c1, abs=1e-12)

    def test_constant_from_derivative(self, quarter):
        pairs = PairSet.of((1, 1), (2, 1))
        v, h = 0.7, 1e-5
        slope = (lambda_of_v(quarter, pairs, v + h) - lambda_of_v(quarter, pairs, v - h)) / (2 * h)
        expected = lambda_of_v(quarter, pairs, v) - v * slope
        assert C_of_v(quarter, pairs, v) == pytest.approx(expected, abs=1e-7)

    @pytest.mark.parametrize(
        "pairs",
        [
            PairSet.of((1, 1), (2, 1)),
            PairSet.of((1, 2), (2, 3)),
            PairSet.of((1, 1), (2, 2), (3, 3)),
        ],
        ids=str,
    )
    def test_taylor_coefficients_of_constant(self, quarter, pairs):
        degree, count = 16, 40
        x = np.cos(np.pi * (np.arange(count) + 0.5) / count)
        v = (x + 1.0) / 2.0
        lam = [lambda_of_v(quarter, pairs, float(t)) for t in v]
        const = [C_of_v(quarter, pairs, float(t)) for t in v]
        lam_coef = Chebyshev(chebfit(x, lam, degree), domain=[0, 1]).convert(kind=Polynomial).coef
        c_coef = Chebyshev(chebfit(x, const, degree), domain=[0, 1]).convert(kind=Polynomial).coef
        assert lam_coef[1] == pytest.approx(0.0, abs=1e-6)
        assert lam_coef[2] == pytest.approx(-psi(quarter, pairs, 2), abs=1e-6)
        for n in range(4):
            assert c_coef[n] == pytest.approx(-(n - 1) * lam_coef[n], abs=1e-6)

    def test_rejects_v_outside_unit_interval(self, quarter):
        with pytest.raises(DomainError):
            lambda_of_v(quarter, PairSet.of((1, 1)), 1.5)
