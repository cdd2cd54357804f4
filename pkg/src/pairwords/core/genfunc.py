"""
Generating Function Module

This module handles rational generating functions: coefficient extraction
by linear recurrence, the cluster matrix and the psi sequence of a pair
set, the avoidance generating function assembled by fraction-free
elimination, and the v-scaled quantities lambda(v) and C(v).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from pairwords.core.geometric import GeomParams, letter_prob_exact
from pairwords.core.transfer import (
    Letter,
    PairSet,
    Weights,
    dominant_eigen_from_weights,
    resolve_weights,
)
from pairwords.exceptions import DomainError
from pairwords.utils.config_loader import Settings, get_settings

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]
Poly = List[Any]


# Polynomial helpers (coefficient lists, lowest degree first)


def poly_trim(a: Poly) -> Poly:
    out = list(a)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out or [0]


def poly_add(a: Poly, b: Poly) -> Poly:
    size = max(len(a), len(b))
    return poly_trim(
        [(a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(size)]
    )


def poly_scale(a: Poly, c: Any) -> Poly:
    return poly_trim([c * x for x in a])


def poly_sub(a: Poly, b: Poly) -> Poly:
    return poly_add(a, poly_scale(b, -1))


def poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return poly_trim(out)


def poly_shift(a: Poly, k: int = 1) -> Poly:
    """Multiply by z^k."""
    return poly_trim([0] * k + list(a))


def poly_exact_div(a: Poly, b: Poly) -> Poly:
    """
    Quotient of an exact division a / b.

    Divides from the constant term upward, so b must have b[0] != 0.
    """
    a, b = poly_trim(a), poly_trim(b)
    if b[0] == 0:
        raise DomainError("divisor must have a nonzero constant term")
    size = len(a) - len(b) + 1
    if size <= 0:
        return [0]
    rest = list(a)
    quotient: Poly = []
    for k in range(size):
        c = rest[k] / b[0]
        quotient.append(c)
        for j, y in enumerate(b):
            if k + j < len(rest):
                rest[k + j] -= c * y
    return poly_trim(quotient)


def poly_eval(a: Poly, z: Any) -> Any:
    total: Any = 0
    for c in reversed(a):
        total = total * z + c
    return total


def bareiss_det(matrix: Sequence[Sequence[Poly]]) -> Poly:
    """
    Determinant of a square matrix of polynomials by Bareiss elimination.

    Every division is exact. Pivots must be nonzero, which holds for the
    matrices used here because their leading principal minors have a
    positive constant term.
    """
    n = len(matrix)
    if n == 0:
        return [1]
    a = [[list(entry) for entry in row] for row in matrix]
    prev: Poly = [1]
    for k in range(n - 1):
        pivot = poly_trim(a[k][k])
        if pivot == [0]:
            raise DomainError("zero pivot in fraction-free elimination")
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = poly_sub(poly_mul(a[i][j], pivot), poly_mul(a[i][k], a[k][j]))
                a[i][j] = poly_exact_div(num, prev)
        prev = pivot
    return poly_trim(a[n - 1][n - 1])


# Rational generating functions


@dataclass(frozen=True)
class RationalGF:
    """N(z)/D(z) with D(0) = 1."""

    numerator: Tuple[Any, ...]
    denominator: Tuple[Any, ...]

    def __post_init__(self) -> None:
        den = poly_trim(list(self.denominator))
        if den[0] == 0:
            raise DomainError("denominator must have a nonzero constant term")
        num = list(self.numerator)
        if den[0] != 1:
            num = [c / den[0] for c in num]
            den = [c / den[0] for c in den]
        object.__setattr__(self, "numerator", tuple(poly_trim(num)))
        object.__setattr__(self, "denominator", tuple(den))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.numerator + self.denominator)

    def coefficients(self, count: int) -> List[Any]:
        """
        First `count` coefficients from a_n = N_n - sum_k D_k a_{n-k}.

        Args:
            count: Number of coefficients (z^0 .. z^(count-1))
        """
        num, den = self.numerator, self.denominator
        out: List[Any] = []
        for n in range(count):
            value = num[n] if n < len(num) else 0
            for k in range(1, min(n, len(den) - 1) + 1):
                value -= den[k] * out[n - k]
            out.append(value)
        return out

    def coefficient(self, n: int, settings: Optional[Settings] = None) -> Any:
        """
        [z^n] of the series.

        Floating GFs switch to a companion-matrix power once n passes the
        configured fast-path threshold; rational GFs always recur.
        """
        if n < 0:
            raise DomainError(f"coefficient index must be >= 0, got {n}")
        settings = settings or get_settings()
        order = len(self.denominator) - 1
        if self.is_exact or n <= settings.exact.fast_path_threshold or order == 0:
            return self.coefficients(n + 1)[n]
        return self._coefficient_by_power(n)

    def _coefficient_by_power(self, n: int) -> float:
        order = len(self.denominator) - 1
        seed = [float(c) for c in self.coefficients(len(self.numerator) + order)]
        start = len(seed) - order
        if n < len(seed):
            return seed[n]
        # state (a_{m}, ..., a_{m-order+1}) advances by the homogeneous recurrence
        companion = np.zeros((order, order))
        companion[0, :] = [-float(c) for c in self.denominator[1:]]
        companion[1:, :-1] = np.eye(order - 1)
        state = np.array(seed[start:][::-1])
        steps = n - (len(seed) - 1)
        state = np.linalg.matrix_power(companion, steps) @ state
        return float(state[0])

    def evaluate(self, z: complex) -> complex:
        return poly_eval(list(self.numerator), z) / poly_eval(list(self.denominator), z)

    def to_float(self) -> "RationalGF":
        return RationalGF(
            tuple(float(c) for c in self.numerator), tuple(float(c) for c in self.denominator)
        )


# Cluster matrix and psi


@dataclass(frozen=True)
class ClusterMatrix:
    """|J| x |J| matrix with P_m at forbidden (k, m) and the weight row p."""

    index: Tuple[Letter, ...]
    matrix: Tuple[Tuple[Any, ...], ...]
    weights: Tuple[Any, ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)


def _exact_weights(
    params: Optional[GeomParams], pairs: PairSet, weights: Optional[Weights]
) -> Dict[Letter, Fraction]:
    out: Dict[Letter, Fraction] = {}
    for j in pairs.letters:
        if weights is not None and j in weights:
            out[j] = Fraction(weights[j]).limit_denominator(10**12)
        elif isinstance(j, int) and params is not None:
            out[j] = letter_prob_exact(params, j)
        else:
            raise DomainError(f"no probability for letter {j!r}; pass it in weights")
    return out


def cluster_matrix(
    params: Optional[GeomParams],
    pairs: PairSet,
    weights: Optional[Weights] = None,
    exact: bool = False,
) -> ClusterMatrix:
    """Build the cluster matrix of a pair set."""
    w: Dict[Letter, Any] = (
        _exact_weights(params, pairs, weights) if exact else resolve_weights(params, pairs, weights)
    )
    letters = pairs.letters
    zero: Any = Fraction(0) if exact else 0.0
    rows = tuple(tuple(w[m] if (k, m) in pairs else zero for m in letters) for k in letters)
    return ClusterMatrix(letters, rows, tuple(w[j] for j in letters))


def psi(
    params: Optional[GeomParams],
    pairs: PairSet,
    k: int,
    weights: Optional[Weights] = None,
) -> float:
    """
    psi_k = p M^(k-1) 1, so psi_1 = sum P_j = 1 - P_e and psi_2 = sum P_a P_b.

    Args:
        params: Letter distribution
        pairs: Pair set
        k: Index, k >= 1
    """
    if k < 1:
        raise DomainError(f"psi index must be >= 1, got {k}")
    cm = cluster_matrix(params, pairs, weights)
    vec = np.ones(len(cm.index))
    m = cm.as_array()
    for _ in range(k - 1):
        vec = m @ vec
    return float(np.asarray(cm.weights) @ vec)


@dataclass(frozen=True)
class PsiSeries:
    """psi_1 .. psi_K; entries may be floats or symbolic series."""

    values: Tuple[Any, ...]

    def __getitem__(self, k: int) -> Any:
        """1-based access, psi[k] = psi_k."""
        if k < 1 or k > len(self.values):
            raise DomainError(f"psi_{k} not available (have 1..{len(self.values)})")
        return self.values[k - 1]

    def __len__(self) -> int:
        return len(self.values)


def psi_series(
    params: Optional[GeomParams], pairs: PairSet, order: int, weights: Optional[Weights] = None
) -> PsiSeries:
    """psi_1 .. psi_order as floats."""
    if order < 1:
        raise DomainError(f"order must be >= 1, got {order}")
    cm = cluster_matrix(params, pairs, weights)
    m = cm.as_array()
    w = np.asarray(cm.weights)
    vec = np.ones(len(cm.index))
    values = []
    for _ in range(order):
        values.append(float(w @ vec))
        vec = m @ vec
    return PsiSeries(tuple(values))


def lambda_psi_expansion(psi_values: PsiSeries) -> Any:
    """lambda1 through psi-degree 4: 1 - psi_2 + psi_3 - (psi_2^2 + psi_4)."""
    p2, p3, p4 = psi_values[2], psi_values[3], psi_values[4]
    return 1 - p2 + p3 - (p2 * p2 + p4)


def c_psi_expansion(psi_values: PsiSeries) -> Any:
    """C1 through psi-degree 4, read off C(v) = lambda(v) - v lambda'(v)."""
    p2, p3, p4 = psi_values[2], psi_values[3], psi_values[4]
    return 1 + p2 - 2 * p3 + 3 * (p2 * p2 + p4)


def avoidance_series_psi(psi_values: PsiSeries, count: Optional[int] = None) -> List[Any]:
    """
    Leading coefficients of the avoidance GF written in psi.

    The GF is 1/(1 - z + psi_2 z^2 - psi_3 z^3 + ...), so
    a_n = a_{n-1} - sum_{k=2..n} (-1)^k psi_k a_{n-k}. Coefficients are
    complete while n <= len(psi_values).
    """
    count = count if count is not None else len(psi_values) + 1
    out: List[Any] = []
    for n in range(count):
        if n == 0:
            out.append(1)
            continue
        value = out[n - 1]
        for k in range(2, min(n, len(psi_values)) + 1):
            term = psi_values[k] * out[n - k]
            value = value - term if k % 2 == 0 else value + term
        out.append(value)
    return out


def avoidance_gf(
    params: Optional[GeomParams],
    pairs: PairSet,
    weights: Optional[Weights] = None,
    exact: bool = False,
) -> RationalGF:
    """
    Generating function sum_n P(no forbidden pair in n letters) z^n.

    With A = I + zM and the matrix determinant lemma,
    p adj(A) 1 = det(A + 1 p) - det(A), so the GF is
    D / (D + psi_1 z D - z D') with D = det(A) and D' = det(A + 1 p).
    Both determinants come from fraction-free elimination over polynomials.

    Args:
        params: Letter distribution
        pairs: Forbidden pairs
        weights: Optional letter probabilities (required for named letters)
        exact: Use rational arithmetic

    Returns:
        RationalGF normalized to denominator constant 1
    """
    try:
        cm = cluster_matrix(params, pairs, weights, exact=exact)
        d = len(cm.index)
        one: Any = Fraction(1) if exact else 1.0
        psi1 = sum(cm.weights, Fraction(0) if exact else 0.0)
        if psi1 >= 1:
            raise DomainError(f"lumped probability P_e = {float(1 - psi1):.3g} must be positive")

        base = [
            [[one if k == m else 0, cm.matrix[k][m]] for m in range(d)] for k in range(d)
        ]
        lifted = [
            [[base[k][m][0] + cm.weights[m], base[k][m][1]] for m in range(d)] for k in range(d)
        ]
        det_base = bareiss_det(base)
        det_lifted = bareiss_det(lifted)

        denominator = poly_sub(
            poly_add(det_base, poly_shift(poly_scale(det_base, psi1))), poly_shift(det_lifted)
        )
        gf = RationalGF(tuple(det_base), tuple(denominator))
        logger.debug(f"avoidance GF for {pairs}: denominator degree {len(gf.denominator) - 1}")
        return gf
    except Exception as e:
        logger.error(f"Error assembling avoidance GF for {pairs}: {str(e)}")
        raise


# v-scaled system


def _psi_function(cm: ClusterMatrix, z: float) -> float:
    """Psi(z) = z p (I + zM)^(-1) 1."""
    m = cm.as_array()
    rhs = np.ones(len(cm.index))
    w = np.asarray(cm.weights, dtype=float)
    return float(z * w @ np.linalg.solve(np.eye(len(rhs)) + z * m, rhs))


def _scaled_weights(
    params: Optional[GeomParams], pairs: PairSet, v: float, weights: Optional[Weights]
) -> Dict[Letter, float]:
    return {j: v * w for j, w in resolve_weights(params, pairs, weights).items()}


def lambda_of_v(
    params: Optional[GeomParams],
    pairs: PairSet,
    v: float,
    weights: Optional[Weights] = None,
    settings: Optional[Settings] = None,
) -> float:
    """
    lambda(v), the Perron root with every P_j replaced by v P_j.

    Solved by the fixed point lambda = (1 - v psi_1)/(1 - Psi(v/lambda))
    seeded at 1. If the iteration stops contracting the eigen route on the
    scaled transfer matrix is used instead.
    """
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"v must lie in [0, 1], got {v}")
    if v == 0.0:
        return 1.0
    settings = settings or get_settings()
    cm = cluster_matrix(params, pairs, weights)
    psi1 = float(sum(cm.weights))
    tol = settings.numerics.fixed_point_tolerance
    lam = 1.0
    last_step = float("inf")
    for it in range(1, settings.numerics.fixed_point_max_iterations + 1):
        try:
            new = (1.0 - v * psi1) / (1.0 - _psi_function(cm, v / lam))
        except np.linalg.LinAlgError:
            break
        step = abs(new - lam)
        if not np.isfinite(new) or new <= 0.0 or (it > 2 and step > last_step):
            break
        lam, last_step = new, step
        if step <= tol * lam:
            logger.debug(f"lambda({v}) fixed point converged after {it} steps")
            return lam

    logger.warning(f"fixed point for lambda({v}) did not contract; using the eigen route")
    scaled = _scaled_weights(params, pairs, v, weights)
    return dominant_eigen_from_weights(scaled, pairs, settings).lambda1


def C_of_v(
    params: Optional[GeomParams],
    pairs: PairSet,
    v: float,
    weights: Optional[Weights] = None,
    settings: Optional[Settings] = None,
) -> float:
    """C(v), the constant C1 of the v-scaled system."""
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"v must lie in [0, 1], got {v}")
    if v == 0.0:
        return 1.0
    return dominant_eigen_from_weights(
        _scaled_weights(params, pairs, v, weights), pairs, settings
    ).c1
