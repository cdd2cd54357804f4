"""
Asymptotics Module

This module handles the large-n formulas for the distinct-pair counts:
the harmonic sums G, G-tilde and G-hat in their Mellin (smooth plus
Fourier) forms next to direct-summation oracles, the means and variances
of X1, X2, X3, the cumulants of X1, the covariance main terms between two
pair indicators and the Poisson law of a single pair count.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from pairwords.core.geometric import GeomParams
from pairwords.core.special import complex_gamma, gamma_derivative
from pairwords.core.transfer import Letter, LetterPair, PairSet, Weights, resolve_weights
from pairwords.exceptions import ConvergenceError, DomainError
from pairwords.utils.config_loader import Settings, get_settings

logger = logging.getLogger(__name__)

EULER_GAMMA = float(np.euler_gamma)


@dataclass(frozen=True)
class Constants:
    """Quantities shared by every expansion at a given (p, n)."""

    L: float
    chi: complex
    n2: float
    alpha: float
    i_star: float

    @classmethod
    def of(cls, params: GeomParams, n: float = 1.0) -> "Constants":
        L = -math.log1p(-params.p)
        q2 = params.q**2
        n2 = n * params.p**2 / q2
        return cls(L, 2j * math.pi / L, n2, q2 / (1.0 - q2), math.log(n2) / (2.0 * L))


@dataclass(frozen=True)
class FourierValue:
    """Smooth part plus an oscillating Fourier sum, truncated with a bound."""

    smooth: float
    periodic: float
    terms: int
    truncation_bound: float
    imag_residue: float = 0.0

    @property
    def value(self) -> float:
        return self.smooth + self.periodic

    def __float__(self) -> float:
        return self.value


def combine(parts: Sequence[Tuple[float, FourierValue]]) -> FourierValue:
    """Linear combination sum c_k V_k, bounds added in absolute value."""
    return FourierValue(
        smooth=sum(c * v.smooth for c, v in parts),
        periodic=sum(c * v.periodic for c, v in parts),
        terms=max((v.terms for _, v in parts), default=0),
        truncation_bound=sum(abs(c) * v.truncation_bound for c, v in parts),
        imag_residue=sum(abs(c) * v.imag_residue for c, v in parts),
    )


def _fourier_sum(
    term: Callable[[int], complex], tol: float, max_terms: int
) -> Tuple[complex, int, float]:
    """
    sum over l != 0 of term(l), taken in +-l pairs.

    Stops once a pair's magnitude falls below tol/2; the rest is bounded
    by a geometric series with the last observed decay ratio. A pair that
    underflows to zero ends the sum with a zero bound.
    """
    total = 0j
    previous = None
    for ell in range(1, max_terms + 1):
        plus, minus = term(ell), term(-ell)
        magnitude = abs(plus) + abs(minus)
        if magnitude == 0.0:
            return total, ell - 1, 0.0
        total += plus + minus
        if magnitude < tol / 2:
            ratio = min(magnitude / previous, 0.99) if previous else 0.5
            return total, ell, magnitude * ratio / (1.0 - ratio)
        previous = magnitude
    raise ConvergenceError(
        f"Fourier sum did not reach {tol:g} in {max_terms} terms",
        diagnostic={"last_magnitude": previous},
    )


def _settings_tol(tol: Optional[float], settings: Optional[Settings]) -> Tuple[float, Settings]:
    settings = settings or get_settings()
    return (tol if tol is not None else settings.asymptotics.fourier_tolerance), settings


# Harmonic sums


def G_sum(
    x: float, params: GeomParams, tol: Optional[float] = None, settings: Optional[Settings] = None
) -> FourierValue:
    """
    sum_{i>=0} (1 - exp(-x q^(2i))) in Mellin form.

    smooth   ln(x)/(2L) + gamma/(2L) + 1/2
    periodic -(1/(2L)) sum_{l!=0} Gamma(l chi/2) x^(-l chi/2)
    """
    if x <= 0:
        raise DomainError(f"x must be positive, got {x}")
    tol, settings = _settings_tol(tol, settings)
    c = Constants.of(params)
    log_x = math.log(x)

    def term(ell: int) -> complex:
        s = ell * c.chi / 2.0
        return -complex_gamma(s) * cmath.exp(-s * log_x) / (2.0 * c.L)

    periodic, terms, bound = _fourier_sum(term, tol, settings.asymptotics.fourier_max_terms)
    smooth = log_x / (2.0 * c.L) + EULER_GAMMA / (2.0 * c.L) + 0.5
    return FourierValue(smooth, periodic.real, terms, bound, abs(periodic.imag))


def G_direct(x: float, params: GeomParams) -> float:
    """sum_{i>=0} (1 - exp(-x q^(2i))) summed until x q^(2i) < 1e-17."""
    decay = 2.0 * -math.log(params.q)
    count = max(1, int(math.ceil((math.log(x) + 17 * math.log(10)) / decay))) + 1
    arg = x * params.q ** (2.0 * np.arange(count))
    return math.fsum(-np.expm1(-arg))


def Gt_sum(
    x: float, params: GeomParams, tol: Optional[float] = None, settings: Optional[Settings] = None
) -> FourierValue:
    """
    sum_{i,j>=0} (1 - exp(-x q^(i+j))) in Mellin form.

    smooth   ln^2 x/(2L^2) + (gamma/L^2 + 1/L) ln x + (pi^2 + 6 gamma^2)/(12 L^2) + 5/12 + gamma/L
    periodic (1/L^2) sum_{l!=0} [Gamma'(l chi) - (ln x + L) Gamma(l chi)] x^(-l chi)
    """
    if x <= 0:
        raise DomainError(f"x must be positive, got {x}")
    tol, settings = _settings_tol(tol, settings)
    c = Constants.of(params)
    L, g = c.L, EULER_GAMMA
    log_x = math.log(x)

    def term(ell: int) -> complex:
        s = ell * c.chi
        bracket = gamma_derivative(s) - (log_x + L) * complex_gamma(s)
        return bracket * cmath.exp(-s * log_x) / L**2

    periodic, terms, bound = _fourier_sum(term, tol, settings.asymptotics.fourier_max_terms)
    smooth = (
        log_x**2 / (2.0 * L**2)
        + (g / L**2 + 1.0 / L) * log_x
        + (math.pi**2 + 6.0 * g**2) / (12.0 * L**2)
        + 5.0 / 12.0
        + g / L
    )
    return FourierValue(smooth, periodic.real, terms, bound, abs(periodic.imag))


def Gt_direct(x: float, params: GeomParams) -> float:
    """sum_{k>=0} (k+1)(1 - exp(-x q^k))."""
    count = max(1, int(math.ceil((math.log(x) + 20 * math.log(10)) / -math.log(params.q)))) + 1
    k = np.arange(count)
    return math.fsum((k + 1) * -np.expm1(-x * params.q ** k.astype(float)))


# F1 and G-hat


def _f1_tail(s: complex, params: GeomParams, rows: int) -> float:
    """Majorant of sum over i > rows of the F1 summands (rows = 0 bounds |F1(s)|)."""
    sigma = s.real
    q, p = params.q, params.p
    spread = 2.0 ** abs(sigma)
    inner = 0.5 + 2.0 * q / (1.0 - q)
    return (
        abs(s) * spread * 2.0 * inner * p * q ** (-sigma)
        * q ** (rows * (1.0 - sigma)) / (1.0 - q ** (1.0 - sigma))
    )


def F1_majorant(s: complex, params: GeomParams) -> float:
    """
    Upper bound on |F1(s)| for Re s < 1.

    Each summand is b^(-s) expm1(-s log(1 - d)) with b >= 1 and d <= 1/2,
    so its modulus is at most 2^|sigma| |s| 2 d; the d's are geometric in i and j.
    """
    s = complex(s)
    if s.real >= 1.0:
        raise DomainError(f"F1 needs Re s < 1, got {s}")
    return _f1_tail(s, params, 0)


def F1_with_bound(
    s: complex, params: GeomParams, tol: Optional[float] = None, settings: Optional[Settings] = None
) -> Tuple[complex, float]:
    """
    F1(s) = sum_{i>=1} q^(-is) [(2 - P_i)^(-s) - 2^(-s)
            + 2 sum_{j>=1} ((1 + q^j - p q^(i+j-1))^(-s) - (1 + q^j)^(-s))].

    Differences are formed as b^(-s) expm1(-s log1p(-d)) to avoid cancellation.

    Returns:
        (value, truncation bound)
    """
    s = complex(s)
    if s.real >= 1.0:
        raise DomainError(f"F1 needs Re s < 1, got {s}")
    tol, settings = _settings_tol(tol, settings)
    if s == 0:
        return 0j, 0.0
    p, q = params.p, params.q
    log_q = math.log(q)
    sigma = s.real

    rows = 1
    while _f1_tail(s, params, rows) >= tol / 2:
        rows += 1
    # the j-tail over all rows, bounded the same way
    scale = abs(s) * 2.0 ** abs(sigma) * 4.0 * p * q ** (-sigma) / (1.0 - q ** (1.0 - sigma))
    cols = max(1, int(math.ceil(math.log(tol * (1.0 - q) / (2.0 * scale)) / log_q)))

    j = np.arange(1, cols + 1, dtype=float)
    qj = q**j
    base = (1.0 + qj) ** (-s)
    total = 0j
    for i in range(1, rows + 1):
        pi = p * q ** (i - 1)
        diag = 2.0 ** (-s) * np.expm1(-s * math.log1p(-pi / 2.0))
        d = p * q ** (i - 1) * qj / (1.0 + qj)
        off = np.sum(base * np.expm1(-s * np.log1p(-d)))
        total += cmath.exp(-i * s * log_q) * (diag + 2.0 * off)
    return complex(total), _f1_tail(s, params, rows) + tol / 2


def F1(
    s: complex, params: GeomParams, tol: Optional[float] = None, settings: Optional[Settings] = None
) -> complex:
    """F1(s) for Re s < 1; F1(0) = 0."""
    return F1_with_bound(s, params, tol, settings)[0]


def F1_prime_at_0(params: GeomParams, tol: Optional[float] = None) -> float:
    """
    F1'(0) from the log-product form.

    F1'(0) = -sum log(1 - d) over all summands, and with c_j = p q^j/(1+q^j)
    each d is c_j q^(i-1), so summing the geometric i-series first gives
    sum_j w_j sum_m c_j^m / (m (1 - q^m)), w_0 = 1, w_j = 2.
    """
    tol = tol if tol is not None else get_settings().asymptotics.series_tolerance
    p, q = params.p, params.q
    count = max(1, int(math.ceil(math.log(1e-17) / math.log(q))))
    j = np.arange(count + 1, dtype=float)
    c = p * q**j / (1.0 + q**j)
    w = np.full(c.shape, 2.0)
    w[0] = 1.0
    total = 0.0
    power = np.ones_like(c)
    m = 0
    while True:
        m += 1
        power = power * c
        chunk = float(np.sum(w * power)) / (m * -math.expm1(m * math.log(q)))
        total += chunk
        if chunk < tol * max(total, 1.0) or m > 10_000:
            break
    return total


def G_hat(
    x: float, params: GeomParams, tol: Optional[float] = None, settings: Optional[Settings] = None
) -> FourierValue:
    """
    G-hat in Mellin form: F1'(0)/L + (1/L) sum_{l!=0} Gamma(l chi) F1(l chi) (x p^2)^(-l chi).

    Accurate to O(1/x) against G_hat_direct.
    """
    if x <= 0:
        raise DomainError(f"x must be positive, got {x}")
    tol, settings = _settings_tol(tol, settings)
    c = Constants.of(params)
    log_xp = math.log(x * params.p**2)

    def term(ell: int) -> complex:
        s = ell * c.chi
        g = complex_gamma(s)
        if g == 0:
            return 0j
        return g * F1(s, params, tol, settings) * cmath.exp(-s * log_xp) / c.L

    periodic, terms, bound = _fourier_sum(term, tol, settings.asymptotics.fourier_max_terms)
    smooth = F1_prime_at_0(params) / c.L
    return FourierValue(smooth, periodic.real, terms, bound, abs(periodic.imag))


def G_hat_direct(x: float, params: GeomParams, tol: float = 1e-14) -> float:
    """
    sum_{i,j,k>=1} (exp(x P_i P_j P_k) - 1) exp(-x (P_i P_j + P_j P_k)).

    Each term is exp(c - a - b)(1 - exp(-c)) with a = x P_i P_j,
    b = x P_j P_k, c = x P_i P_j P_k, which stays finite for large x.
    """
    size = 1
    while x * params.p**3 * params.q ** (size - 1) > tol or size < 8:
        size += 1
        if size > 4000:
            break
    P = params.p * params.q ** np.arange(size, dtype=float)
    total = 0.0
    for pj in P:
        a = x * np.outer(P, np.ones_like(P)) * pj
        b = a.T
        c = a * P[None, :]
        total += float(np.sum(np.exp(c - a - b) * -np.expm1(-c)))
    return total


# Means, variances and cumulants


def _x(n: float, params: GeomParams) -> float:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return n * params.p**2


def mean_x1(n: float, params: GeomParams, tol: Optional[float] = None) -> FourierValue:
    """E X1 ~ G(n p^2)."""
    return G_sum(_x(n, params), params, tol)


def mean_x2(n: float, params: GeomParams, tol: Optional[float] = None) -> FourierValue:
    """E X2 ~ G-tilde(n p^2)."""
    return Gt_sum(_x(n, params), params, tol)


def mean_x3(n: float, params: GeomParams, tol: Optional[float] = None) -> FourierValue:
    """E X3 ~ G-tilde(n p^2) - G(n p^2)."""
    x = _x(n, params)
    return combine([(1.0, Gt_sum(x, params, tol)), (-1.0, G_sum(x, params, tol))])


def S1(n: float, params: GeomParams, tol: Optional[float] = None) -> FourierValue:
    """G(2x) - G(x), smooth part ln 2/(2L)."""
    x = _x(n, params)
    return combine([(1.0, G_sum(2 * x, params, tol)), (-1.0, G_sum(x, params, tol))])


def S2(n: float, params: GeomParams, tol: Optional[float] = None) -> FourierValue:
    """G-tilde(2x) - G-tilde(x)."""
    x = _x(n, params)
    return combine([(1.0, Gt_sum(2 * x, params, tol)), (-1.0, Gt_sum(x, params, tol))])


def T2(n: float, params: GeomParams, tol: Optional[float] = None) -> FourierValue:
    """(2/L) F1'(0) + (2/L) sum_{l!=0} Gamma(l chi) F1(l chi) (n p^2)^(-l chi)."""
    return combine([(2.0, G_hat(n, params, tol))])


def var_x1(n: float, params: GeomParams, tol: Optional[float] = None) -> FourierValue:
    return S1(n, params, tol)


def var_x2(n: float, params: GeomParams, tol: Optional[float] = None) -> FourierValue:
    return combine([(1.0, S2(n, params, tol)), (1.0, T2(n, params, tol))])


def var_x3(n: float, params: GeomParams, tol: Optional[float] = None) -> FourierValue:
    s1, s2, t2 = S1(n, params, tol), S2(n, params, tol), T2(n, params, tol)
    return combine([(1.0, s2), (-1.0, s1), (1.0, t2)])


def Vj(n: float, j: int, params: GeomParams, tol: Optional[float] = None) -> FourierValue:
    """
    V_j ~ sum_i (1 - exp(-n P_i^2))^j, expanded binomially into
    sum_{k=1..j} C(j,k) (-1)^(k+1) G(k n p^2).
    """
    if j < 1:
        raise DomainError(f"j must be >= 1, got {j}")
    x = _x(n, params)
    parts = [
        (float(math.comb(j, k) * (-1) ** (k + 1)), G_sum(k * x, params, tol))
        for k in range(1, j + 1)
    ]
    return combine(parts)


def Vj_direct(n: float, j: int, params: GeomParams) -> float:
    """sum_i (1 - exp(-n P_i^2))^j by direct summation."""
    x = _x(n, params)
    count = max(1, int(math.ceil((math.log(x) + 40) / (2.0 * -math.log(params.q))))) + 1
    y = x * params.q ** (2.0 * np.arange(count))
    return math.fsum((-np.expm1(-y)) ** j)


def cumulant_coefficients(m: int) -> List[int]:
    """Row m of the cumulant table: (-1)^(j+1) (j-1)! S(m, j), j = 1..m."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    return [
        (-1) ** (j + 1) * math.factorial(j - 1) * int(special.stirling2(m, j, exact=True))
        for j in range(1, m + 1)
    ]


def cumulant(n: float, m: int, params: GeomParams, tol: Optional[float] = None) -> FourierValue:
    """m-th cumulant of X1: sum_j coefficient_j V_j."""
    coefficients = cumulant_coefficients(m)
    return combine([(float(c), Vj(n, j, params, tol)) for j, c in enumerate(coefficients, 1)])


# Covariance of two pair indicators


@dataclass(frozen=True)
class CovTerm:
    case: str
    main: float
    bound: float


def classify_covariance(pair1: LetterPair, pair2: LetterPair) -> Tuple[str, Dict[str, Letter]]:
    """
    Case label and the role of each letter.

    Returns:
        (case, roles) with roles among i, j, r, t as used by cov_main_term
    """
    if pair1 == pair2:
        raise DomainError("covariance cases need two distinct pairs")
    (a, b), (c, d) = pair1, pair2
    if a == b and c == d:
        return "matching", {"i": a, "r": c}
    if a == b or c == d:
        (i, _), (x, y) = (pair1, pair2) if a == b else (pair2, pair1)
        if x == i:
            return "6a", {"i": i, "r": y}
        if y == i:
            return "6b", {"i": i, "r": x}
        return "3", {"i": i, "r": x, "t": y}
    if a == d and b == c:
        return "5", {"i": a, "r": b}
    if b == c:
        return "1", {"i": a, "r": b, "t": d}
    if d == a:
        return "1", {"i": c, "r": d, "t": b}
    if a == c:
        return "2a", {"i": a, "r": b, "t": d}
    if b == d:
        return "2b", {"i": b, "r": a, "t": c}
    return "4", {"i": a, "j": b, "r": c, "t": d}


def cov_main_term(
    params: Optional[GeomParams],
    pair1: LetterPair,
    pair2: LetterPair,
    n: float,
    weights: Optional[Weights] = None,
) -> CovTerm:
    """
    Leading term of Cov(X_a, X_b) with its error magnitude.

    Only the chain and the swap carry a main term; every other case is
    reported as 0 with the error bound. The bound takes implied constant 1
    and delta = P_e.
    """
    case, roles = classify_covariance(pair1, pair2)
    pairs = PairSet.of(pair1, pair2)
    w = resolve_weights(params, pairs, weights)
    delta = 1.0 - sum(w.values())
    if delta <= 0:
        raise DomainError(f"lumped probability P_e = {delta:.3g} must be positive")
    P = {role: w[letter] for role, letter in roles.items()}
    Pi, Pr = P["i"], P["r"]
    root_n = math.sqrt(n)
    main = 0.0

    if case == "1":
        Pt = P["t"]
        main = math.expm1(n * Pi * Pr * Pt) * math.exp(-n * (Pi * Pr + Pr * Pt))
        bound = (n * Pi * Pr**2 * Pt + root_n * Pi * Pr * Pt) * math.exp(
            -delta / 4 * n * (Pi * Pr + Pr * Pt)
        )
    elif case in ("2a", "2b"):
        Pt = P["t"]
        bound = (n * Pi**2 * Pr * Pt + Pi * Pr * Pt) * math.exp(
            -delta / 4 * n * (Pi * Pr + Pi * Pt)
        )
    elif case == "3":
        Pt = P["t"]
        bound = (n * Pi**2 * Pr * Pt + Pi * Pr * Pt) * math.exp(
            -delta / 4 * n * (Pi**2 + Pr * Pt)
        )
    elif case == "4":
        Pj, Pt = P["j"], P["t"]
        bound = n * Pi * Pj * Pr * Pt * math.exp(-delta / 4 * n * (Pi * Pj + Pr * Pt))
    elif case == "5":
        main = math.expm1(n * Pi * Pr * (Pi + Pr)) * math.exp(-2.0 * n * Pi * Pr)
        bound = (n * Pi**2 * Pr**2 + root_n * Pi * Pr) * math.exp(-delta / 2 * n * Pi * Pr)
    elif case in ("6a", "6b"):
        bound = (n * Pi**2 * Pr + Pi * Pr) * math.exp(-delta / 4 * n * (Pi**2 + Pi * Pr))
    else:
        bound = (n * Pi**2 * Pr**2 + root_n * Pi * Pr) * math.exp(
            -delta / 4 * n * (Pi**2 + Pr**2)
        )
    logger.debug(f"covariance case {case} for {pair1},{pair2}: main={main:.6g}, bound={bound:.3g}")
    return CovTerm(case, main, bound)


def poisson_pair_pmf(n: float, i: int, j: int, m: int, params: GeomParams) -> float:
    """Limit law of the number of occurrences of (i,j): Poisson(n P_i P_j)."""
    lam = n * params.letter_prob(i) * params.letter_prob(j)
    return float(stats.poisson.pmf(m, lam))
