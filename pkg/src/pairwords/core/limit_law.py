"""
Limit Law Module

This module handles the limiting distribution of X1 around its centre
i*(n) = ln(n p^2/q^2)/(2L): the density f(eta), its lattice CDF F(eta),
the tail bounds that pick a finite window of letters, the exact law of
the Poissonized count, and the Gaussian comparison law used for X3.
"""

import logging
import math
from typing import Any, Optional, Tuple

import numpy as np
from scipy import stats

from pairwords.core.asymptotics import Constants, mean_x3, var_x3
from pairwords.core.geometric import GeomParams
from pairwords.exceptions import DomainError
from pairwords.utils.config_loader import Settings, get_settings

logger = logging.getLogger(__name__)

MIN_DENSITY_TOL = 1e-9


def upper_tail_bound(params: GeomParams, eta: float, upper: int) -> float:
    """P(some letter above the window is present) = 1 - exp(-q^(2M+2+2 eta)/(1-q^2))."""
    q2 = params.q**2
    return -math.expm1(-(params.q ** (2 * upper + 2 + 2 * eta)) / (1.0 - q2))


def lower_tail_bound(params: GeomParams, eta: float, lower: int) -> float:
    """Union bound sum_{j>m} exp(-q^(2 eta-2j)) on a missing letter below the window."""
    total = 0.0
    j = lower + 1
    while True:
        term = math.exp(-(params.q ** (2 * eta - 2 * j)))
        total += term
        if term < 1e-300 or term < total * 1e-17:
            return total
        j += 1


def density_window(params: GeomParams, eta: float, tol: float) -> Tuple[int, int]:
    """Smallest (m, M) with both tail bounds below tol/2."""
    lower = 0
    while lower_tail_bound(params, eta, lower) >= tol / 2:
        lower += 1
    upper = 0
    while upper_tail_bound(params, eta, upper) >= tol / 2:
        upper += 1
    return lower, upper


def _check_tol(tol: Optional[float], settings: Settings) -> float:
    tol = tol if tol is not None else settings.asymptotics.density_tolerance
    if tol < MIN_DENSITY_TOL:
        raise DomainError(f"density tolerance must be >= {MIN_DENSITY_TOL:g}, got {tol:g}")
    return tol


def limit_density_f(
    params: GeomParams,
    eta: float,
    tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> float:
    """
    f(eta), the limit of P(X1 = i* + eta).

    Letter i* + eta + i of the window i = -m..M is occupied independently
    with probability b_i = 1 - exp(-q^(2i + 2 eta)); every letter below the
    window counts as occupied, so f(eta) is the probability that exactly m + 1
    of them are occupied: [z^(m+1)] prod_i ((1 - b_i) + b_i z).

    Args:
        params: Letter distribution
        eta: Offset from the centre
        tol: Total truncation error (>= 1e-9)
    """
    settings = settings or get_settings()
    tol = _check_tol(tol, settings)
    lower, upper = density_window(params, eta, tol)
    i = np.arange(-lower, upper + 1, dtype=float)
    rate = params.q ** (2.0 * i + 2.0 * eta)
    empty = np.exp(-rate)
    poly = np.array([1.0])
    for e in empty:
        poly = np.convolve(poly, [e, 1.0 - e])
    logger.debug(f"f({eta}) window [-{lower}, {upper}]")
    return float(poly[lower + 1]) if lower + 1 < poly.size else 0.0


def limit_cdf_F(
    params: GeomParams,
    eta: float,
    tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> float:
    """F(eta) = sum_{i>=0} f(eta - i), stopped below the centre once increments drop under tol."""
    settings = settings or get_settings()
    tol = _check_tol(tol, settings)
    total = 0.0
    i = 0
    while True:
        step = limit_density_f(params, eta - i, tol, settings)
        total += step
        if eta - i < 0 and step < tol:
            return min(total, 1.0)
        i += 1


def poissonized_x1_pmf(
    params: GeomParams, n: float, tol: Optional[float] = None
) -> np.ndarray:
    """
    Exact law of sum_{i>=1} [xi_i >= 1] with xi_i ~ Poisson(n p^2 q^(2(i-1))).

    Letters are added until the remaining rates sum below tol.

    Returns:
        pmf[k] = P(count = k)
    """
    tol = tol if tol is not None else get_settings().asymptotics.density_tolerance
    if n <= 0:
        raise DomainError(f"n must be positive, got {n}")
    q2 = params.q**2
    first = n * params.p**2
    count = 1
    while first * q2**count / (1.0 - q2) >= tol:
        count += 1
    rates = first * q2 ** np.arange(count, dtype=float)
    poly = np.array([1.0])
    for rate in rates:
        e = math.exp(-rate)
        poly = np.convolve(poly, [e, 1.0 - e])
    return poly


def centre(params: GeomParams, n: float) -> float:
    """i*(n) = ln(n p^2/q^2)/(2L)."""
    return Constants.of(params, n).i_star


def gaussian_x3(n: float, params: GeomParams) -> Any:
    """Frozen normal N(E X3, Var X3) used as the comparison law for X3."""
    mean = mean_x3(n, params).value
    var = var_x3(n, params).value
    return stats.norm(loc=mean, scale=math.sqrt(var))
