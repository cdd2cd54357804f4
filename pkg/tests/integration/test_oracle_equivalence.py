"""The transfer matrix, the rational GF and brute-force enumeration agree."""

from itertools import combinations, product
from typing import List, Sequence, Tuple

import numpy as np
import pytest

from pairwords.core.exactgf import joint_prob, prob_pair_occurs
from pairwords.core.genfunc import C_of_v, avoidance_gf, lambda_of_v
from pairwords.core.geometric import GeomParams
from pairwords.core.oracle import avoid_prob_enum, joint_indicator_expectation
from pairwords.core.transfer import PairSet, avoid_prob_matrix, dominant_eigen

ALL_PAIRS = list(product((1, 2, 3), repeat=2))
P_VALUES = ("1/4", "1/2", "2/3")


def random_cases(count: int, seed: int) -> List[Tuple[str, PairSet]]:
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        size = int(rng.integers(1, 5))
        chosen = rng.choice(len(ALL_PAIRS), size=size, replace=False)
        pairs = PairSet.of(*(ALL_PAIRS[k] for k in sorted(chosen)))
        cases.append((P_VALUES[int(rng.integers(len(P_VALUES)))], pairs))
    return cases


CASES = random_cases(200, seed=20_240_601)
CASE_IDS = [f"{k}-{p}:{s}" for k, (p, s) in enumerate(CASES)]


@pytest.mark.parametrize("p, pairs", CASES, ids=CASE_IDS)
class TestThreeRoutes:
    def test_float_routes_agree(self, p, pairs):
        params = GeomParams(p=p)
        gf = avoidance_gf(params, pairs)
        for n in range(9):
            expected = avoid_prob_enum(params, pairs, n)
            assert avoid_prob_matrix(params, pairs, n) == pytest.approx(expected, abs=1e-12)
            assert float(gf.coefficient(n)) == pytest.approx(expected, abs=1e-12)

    def test_exact_routes_agree(self, p, pairs):
        params = GeomParams(p=p)
        gf = avoidance_gf(params, pairs, exact=True)
        for n in range(7):
            assert gf.coefficient(n) == avoid_prob_enum(params, pairs, n, exact=True)

    def test_pair_and_joint_probabilities(self, p, pairs):
        params = GeomParams(p=p)
        ordered = pairs.sorted_pairs
        first, last = ordered[0], ordered[-1]
        both = PairSet.of(first, last)
        for n in (2, 5, 8):
            a1 = avoid_prob_enum(params, PairSet.of(first), n)
            a2 = avoid_prob_enum(params, PairSet.of(last), n)
            a12 = avoid_prob_enum(params, both, n)
            assert prob_pair_occurs(params, first[0], first[1], n) == pytest.approx(
                1.0 - a1, abs=1e-10
            )
            expected = 1.0 - a1 - a2 + a12
            assert joint_prob(params, first, last, n) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("p, pairs", CASES[:24], ids=CASE_IDS[:24])
def test_growth_rate(p, pairs):
    params = GeomParams(p=p)
    lam, c1 = dominant_eigen(params, pairs)
    n = 150
    ratio = avoid_prob_matrix(params, pairs, n + 1) / avoid_prob_matrix(params, pairs, n)
    assert ratio == pytest.approx(lam, rel=1e-6)
    assert lambda_of_v(params, pairs, 1.0) == pytest.approx(lam, abs=1e-12)
    assert C_of_v(params, pairs, 1.0) == pytest.approx(c1, abs=1e-10)


@pytest.mark.parametrize("p, pairs", CASES[:20], ids=CASE_IDS[:20])
def test_constant_is_lambda_minus_v_slope(p, pairs):
    params = GeomParams(p=p)
    v, h = 0.6, 1e-5
    slope = (lambda_of_v(params, pairs, v + h) - lambda_of_v(params, pairs, v - h)) / (2 * h)
    expected = lambda_of_v(params, pairs, v) - v * slope
    assert C_of_v(params, pairs, v) == pytest.approx(expected, abs=1e-6)


def cell_prob(params: GeomParams, hit: Sequence[tuple], miss: Sequence[tuple], n: int) -> float:
    """P(every hit pair occurs, no miss pair occurs) through the transfer matrix."""
    total = 0.0
    for size in range(len(hit) + 1):
        for subset in combinations(hit, size):
            avoided = list(subset) + list(miss)
            value = avoid_prob_matrix(params, PairSet.of(*avoided), n) if avoided else 1.0
            total += -value if size % 2 else value
    return total


class TestAsymptoticIndependence:
    @pytest.mark.parametrize("letters", [(1, 2), (2, 3), (1, 3), (1, 2, 3)])
    def test_scaled_gap_stays_bounded(self, params, letters):
        pairs = [(i, i) for i in letters]
        worst = []
        for n in (8, 10, 12):
            occurs = {pair: 1.0 - avoid_prob_matrix(params, PairSet.of(pair), n) for pair in pairs}
            gaps = []
            for pattern in product((0, 1), repeat=len(pairs)):
                hit = [pair for pair, x in zip(pairs, pattern) if x]
                miss = [pair for pair, x in zip(pairs, pattern) if not x]
                marginal = np.prod(
                    [occurs[pair] if x else 1.0 - occurs[pair] for pair, x in zip(pairs, pattern)]
                )
                gaps.append(abs(cell_prob(params, hit, miss, n) - marginal))
            worst.append(n * max(gaps))
        assert max(worst) < 1.0

    def test_cells_match_enumeration(self, quarter):
        hit, miss = [(1, 1)], [(2, 2)]
        expected = joint_indicator_expectation(quarter, hit, miss, 8)
        assert cell_prob(quarter, hit, miss, 8) == pytest.approx(expected, abs=1e-12)
