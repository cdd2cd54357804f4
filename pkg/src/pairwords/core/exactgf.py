"""
Exact Moments Module

This module handles the exact mean and second moment of the number of
distinct adjacent pairs through the cluster generating functions of one
and two forbidden pairs. Coefficients come from the linear recurrence of
each denominator; partial fractions over the denominator roots are kept
as a cross-check.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from pairwords.core.genfunc import RationalGF
from pairwords.core.geometric import (
    GeomParams,
    MomentResult,
    diagonal_tail,
    letter_prob,
    off_diagonal_tail,
    weighted_index_tail,
)
from pairwords.exceptions import BudgetExceededError, DomainError
from pairwords.utils.config_loader import Settings, get_settings

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


@dataclass(frozen=True)
class GFCase:
    """One tabulated avoidance GF: label, the letters it is written in, the GF."""

    label: str
    letters: Tuple[int, ...]
    gf: RationalGF

    @property
    def cubic(self) -> Tuple[float, float, float, float]:
        """Denominator as (a, b, c, d) for d + c z + b z^2 + a z^3."""
        den = list(self.gf.denominator) + [0.0] * (4 - len(self.gf.denominator))
        return (float(den[3]), float(den[2]), float(den[1]), float(den[0]))


# Table builders. Arguments are letter probabilities.


def table_a(pi: float, pj: float) -> RationalGF:
    """Avoid (i,j), i != j."""
    return RationalGF((1.0,), (1.0, -1.0, pi * pj))


def table_b(pi: float) -> RationalGF:
    """Avoid (i,i)."""
    return RationalGF((1.0, pi), (1.0, -(1.0 - pi), -pi * (1.0 - pi)))


def table_c(weight: float) -> RationalGF:
    """Avoid two non-overlapping pairs whose products sum to `weight`."""
    return RationalGF((1.0,), (1.0, -1.0, weight))


def table_d(pi: float, pl: float) -> RationalGF:
    """Avoid (i,i) and (i,l)."""
    return RationalGF((1.0, pi), (1.0, -(1.0 - pi), pi * pi + pi * pl - pi))


def table_e(pi: float, pk: float) -> RationalGF:
    """Avoid (i,i) and (k,k)."""
    s, t = pi + pk, pi * pk
    return RationalGF((1.0, s, t), (1.0, s - 1.0, s * s - t - s, t * (s - 1.0)))


def table_f(pi: float, pk: float, pl: float) -> RationalGF:
    """Avoid (i,i) and (k,l) with i, k, l distinct."""
    return RationalGF(
        (1.0, pi), (1.0, pi - 1.0, pi * pi - pi + pk * pl, pi * pk * pl)
    )


def table_g(pi: float, pj: float, pl: float) -> RationalGF:
    """Avoid the chain (i,j), (j,l) with l != i."""
    return RationalGF((1.0,), (1.0, -1.0, pi * pj + pj * pl, -pi * pj * pl))


def table_h(pi: float, pj: float) -> RationalGF:
    """Avoid both (i,j) and (j,i)."""
    x = pi * pj
    return RationalGF((1.0, 0.0, -x), (1.0, -1.0, x, x * (1.0 - pi - pj)))


def classify_joint(pair1: Pair, pair2: Pair) -> str:
    """Table label of the GF that avoids both pairs ('same' if they coincide)."""
    (i, j), (k, m) = pair1, pair2
    if pair1 == pair2:
        return "B" if i == j else "A"
    if i == j and k == m:
        return "E"
    if i == j or k == m:
        (a, _), (c, d) = (pair1, pair2) if i == j else (pair2, pair1)
        return "D" if a in (c, d) else "F"
    if i == m and j == k:
        return "H"
    if j == k or i == m:
        return "G"
    return "C"


def joint_case(params: GeomParams, pair1: Pair, pair2: Pair) -> GFCase:
    """
    The GF of avoiding both pairs, dispatched on how their letters coincide.

    Args:
        params: Letter distribution
        pair1: First pair
        pair2: Second pair, distinct from the first
    """
    P = lambda x: letter_prob(params, x)  # noqa: E731
    label = classify_joint(pair1, pair2)
    (i, j), (k, m) = pair1, pair2

    if label in ("A", "B"):
        gf = table_b(P(i)) if i == j else table_a(P(i), P(j))
        return GFCase(label, (i, j), gf)
    if label == "E":
        return GFCase(label, (i, k), table_e(P(i), P(k)))
    if label in ("D", "F"):
        (a, _), (c, d) = (pair1, pair2) if i == j else (pair2, pair1)
        if label == "F":
            return GFCase(label, (a, c, d), table_f(P(a), P(c), P(d)))
        other = d if c == a else c
        return GFCase(label, (a, other), table_d(P(a), P(other)))
    if label == "H":
        return GFCase(label, (i, j), table_h(P(i), P(j)))
    if label == "G":
        # chain (x, y), (y, z)
        x, y, z = (i, j, m) if j == k else (k, i, j)
        return GFCase(label, (x, y, z), table_g(P(x), P(y), P(z)))
    return GFCase(label, (i, j, k, m), table_c(P(i) * P(j) + P(k) * P(m)))


# Roots and partial fractions


class CubicRoots(NamedTuple):
    roots: Tuple[complex, ...]
    clustered: bool


def _polish(coeffs_low: Sequence[float], root: complex, steps: int = 3) -> complex:
    poly = np.polynomial.Polynomial(coeffs_low)
    deriv = poly.deriv()
    for _ in range(steps):
        slope = deriv(root)
        if slope == 0:
            break
        root = root - poly(root) / slope
    return complex(root)


def _roots_low_first(coeffs_low: Sequence[float], settings: Settings) -> CubicRoots:
    coeffs = [float(c) for c in coeffs_low]
    scale = max((abs(c) for c in coeffs), default=0.0)
    if scale == 0.0:
        raise DomainError("the zero polynomial has no roots")
    while len(coeffs) > 1 and abs(coeffs[-1]) <= 1e-15 * scale:
        coeffs.pop()
    if len(coeffs) == 1:
        return CubicRoots((), False)
    raw = np.roots(coeffs[::-1])
    roots = sorted((_polish(coeffs, complex(r)) for r in raw), key=abs)
    gap = settings.exact.root_gap
    clustered = any(
        abs(roots[a] - roots[b]) < gap * max(abs(roots[a]), abs(roots[b]))
        for a in range(len(roots))
        for b in range(a + 1, len(roots))
    )
    return CubicRoots(tuple(roots), clustered)


def cubic_roots(
    a: float, b: float, c: float, d: float, settings: Optional[Settings] = None
) -> CubicRoots:
    """
    Roots of d + c z + b z^2 + a z^3, smallest modulus first.

    A vanishing leading coefficient drops the degree. Roots come from the
    companion eigenvalues and get Newton polish; `clustered` flags pairs
    closer than exact.root_gap relative.
    """
    settings = settings or get_settings()
    result = _roots_low_first([d, c, b, a], settings)
    if result.clustered:
        logger.warning(f"near-coincident roots for ({a}, {b}, {c}, {d})")
    return result


def partial_fraction_coefficient(
    gf: RationalGF, n: int, settings: Optional[Settings] = None
) -> Optional[float]:
    """
    [z^n] N/Q = -sum_rho N(rho) / (Q'(rho) rho^(n+1)) over the simple roots of Q.

    Returns None when the roots cluster or deg N >= deg Q.
    """
    settings = settings or get_settings()
    num = [float(c) for c in gf.numerator]
    den = [float(c) for c in gf.denominator]
    if len(num) >= len(den):
        return None
    roots = _roots_low_first(den, settings)
    if roots.clustered:
        return None
    N = np.polynomial.Polynomial(num)
    dQ = np.polynomial.Polynomial(den).deriv()
    with np.errstate(over="ignore"):
        total = sum(
            -N(r) / (dQ(r) * np.power(np.complex128(r), n + 1)) for r in roots.roots
        )
    return float(np.real(total))


# Single pairs


def _avoid_coefficient(gf: RationalGF, n: int, settings: Settings) -> float:
    return float(gf.coefficient(n, settings))


def single_pair_gf(params: GeomParams, pair: Pair) -> RationalGF:
    i, j = pair
    if i == j:
        return table_b(letter_prob(params, i))
    return table_a(letter_prob(params, i), letter_prob(params, j))


def prob_pair_occurs(
    params: GeomParams,
    i: int,
    j: int,
    n: int,
    check: bool = True,
    settings: Optional[Settings] = None,
) -> float:
    """
    E X_{i,j}, the probability that (i,j) occurs at least once in n letters.

    Args:
        params: Letter distribution
        i: First letter
        j: Second letter
        n: Word length
        check: Also evaluate the partial-fraction closed form and compare

    Returns:
        1 - [z^n] of the avoidance GF; 0 for n < 2
    """
    settings = settings or get_settings()
    if n < 0:
        raise DomainError(f"word length must be >= 0, got {n}")
    if n < 2:
        return 0.0
    gf = single_pair_gf(params, (i, j))
    value = 1.0 - _avoid_coefficient(gf, n, settings)
    if check:
        closed = partial_fraction_coefficient(gf, n, settings)
        if closed is not None and abs((1.0 - closed) - value) > 1e-10:
            logger.warning(
                f"closed form and recurrence disagree for ({i},{j}) n={n}: "
                f"{1.0 - closed:.15g} vs {value:.15g}"
            )
    return value


# Pairs of pairs


def joint_prob(
    params: GeomParams, pair1: Pair, pair2: Pair, n: int, settings: Optional[Settings] = None
) -> float:
    """
    E[X_{i,j} X_{k,l}] = 1 - a1 - a2 + a12.

    a1 and a2 avoid one pair each, a12 avoids both; all three are GF
    coefficients at z^n.
    """
    settings = settings or get_settings()
    if n < 0:
        raise DomainError(f"word length must be >= 0, got {n}")
    if n < 2:
        return 0.0
    if pair1 == pair2:
        return prob_pair_occurs(params, pair1[0], pair1[1], n, check=False, settings=settings)
    a1 = _avoid_coefficient(single_pair_gf(params, pair1), n, settings)
    a2 = _avoid_coefficient(single_pair_gf(params, pair2), n, settings)
    a12 = _avoid_coefficient(joint_case(params, pair1, pair2).gf, n, settings)
    return 1.0 - a1 - a2 + a12


def exact_covariance(
    params: GeomParams, pair1: Pair, pair2: Pair, n: int, settings: Optional[Settings] = None
) -> float:
    """Cov(X_{i,j}, X_{k,l}) = a12 - a1 a2."""
    settings = settings or get_settings()
    if n < 2:
        return 0.0
    a1 = _avoid_coefficient(single_pair_gf(params, pair1), n, settings)
    a2 = _avoid_coefficient(single_pair_gf(params, pair2), n, settings)
    if pair1 == pair2:
        return a1 - a1 * a2
    a12 = _avoid_coefficient(joint_case(params, pair1, pair2).gf, n, settings)
    return a12 - a1 * a2


# Totals


def mean_total(
    params: GeomParams, n: int, tol: Optional[float] = None, settings: Optional[Settings] = None
) -> MomentResult:
    """
    Exact E X2 with a certified truncation bound.

    The diagonal runs over i until n sum_{k>i} P_k^2 < tol/2. Off-diagonal
    pairs are grouped by u = i + j: every ordered pair with that sum shares
    P_i P_j = (p/q)^2 q^u, and there are u - 1 - [u even] of them.

    Args:
        params: Letter distribution
        n: Word length
        tol: Bound on the discarded mass

    Returns:
        MomentResult with parts 'diagonal' (E X1) and 'off_diagonal' (E X3)
    """
    try:
        settings = settings or get_settings()
        tol = tol if tol is not None else settings.exact.default_tolerance
        if n < 2:
            return MomentResult(0.0, 0.0, 0, {"diagonal": 0.0, "off_diagonal": 0.0})
        logger.info(f"exact mean at n={n}, p={params.p}, tol={tol:g}")

        diag: List[float] = []
        i = 0
        while True:
            i += 1
            diag.append(1.0 - _avoid_coefficient(table_b(letter_prob(params, i)), n, settings))
            if diagonal_tail(params, n, i) < tol / 2:
                break
        diag_tail = diagonal_tail(params, n, i)

        ratio = (params.p / params.q) ** 2
        off: List[float] = []
        u = 2
        while True:
            u += 1
            count = u - 1 - (1 if u % 2 == 0 else 0)
            x = ratio * params.q**u
            occur = 1.0 - _avoid_coefficient(RationalGF((1.0,), (1.0, -1.0, x)), n, settings)
            off.append(count * occur)
            if off_diagonal_tail(params, n, u) < tol / 2:
                break
        off_tail = off_diagonal_tail(params, n, u)

        diagonal, off_diagonal = math.fsum(diag), math.fsum(off)
        logger.info(f"E X at n={n}: {diagonal + off_diagonal:.12g} (letters {i}, sums {u})")
        return MomentResult(
            diagonal + off_diagonal,
            diag_tail + off_tail,
            len(diag) + len(off),
            {"diagonal": diagonal, "off_diagonal": off_diagonal},
        )
    except Exception as e:
        logger.error(f"Error computing exact mean: {str(e)}")
        raise


def _second_moment_cutoff(params: GeomParams, n: int, tol: float) -> Tuple[int, float]:
    """Smallest U with 2 (n-1)^2 sum_{i+j>U} P_i P_j below tol."""
    ratio = (params.p / params.q) ** 2
    factor = 2.0 * (n - 1) ** 2 * ratio
    u = 2
    while factor * weighted_index_tail(params.q, u) >= tol:
        u += 1
    return u, factor * weighted_index_tail(params.q, u)


def second_moment_total(
    params: GeomParams, n: int, tol: Optional[float] = None, settings: Optional[Settings] = None
) -> MomentResult:
    """
    Exact E[X2^2] summed over pairs of pairs.

    Pairs are kept while i + j <= U. Since E[X_a X] <= (n-1) E X_a and
    E X_a <= (n-1) P_i P_j, dropping the rest costs at most
    2 (n-1)^2 sum_{i+j>U} P_i P_j, which sets U. The double sum is folded
    to a <= b.

    Args:
        params: Letter distribution
        n: Word length
        tol: Bound on the discarded mass
    """
    try:
        settings = settings or get_settings()
        tol = tol if tol is not None else settings.exact.default_tolerance
        if n < 2:
            return MomentResult(0.0, 0.0, 0, {})
        cutoff, tail = _second_moment_cutoff(params, n, tol)
        kept = [(i, u - i) for u in range(2, cutoff + 1) for i in range(1, u)]
        required = len(kept) * (len(kept) + 1) // 2
        budget = settings.exact.max_quadruples
        if required > budget:
            raise BudgetExceededError(
                f"second moment needs {required} pair combinations, budget is {budget}",
                required=required,
                budget=budget,
            )
        logger.info(f"exact second moment at n={n}: {len(kept)} pairs, {required} combinations")

        terms: List[float] = []
        for a, first in enumerate(kept):
            terms.append(joint_prob(params, first, first, n, settings))
            for second in kept[a + 1 :]:
                terms.append(2.0 * joint_prob(params, first, second, n, settings))
        value = math.fsum(terms)
        logger.info(f"E X^2 at n={n}: {value:.12g}")
        return MomentResult(value, tail, len(terms), {"pairs": float(len(kept))})
    except Exception as e:
        logger.error(f"Error computing exact second moment: {str(e)}")
        raise
