"""
Special Functions Module

This module handles the complex gamma function on the imaginary axis,
where every Fourier term of the Mellin expansions lives. Gamma is
evaluated in log form through the Lanczos approximation (g = 7,
9 coefficients) with reflection, so that |Gamma(i t)| ~ e^(-pi |t| / 2)
underflows gracefully instead of overflowing in an intermediate.
"""

import cmath
import logging
import math
from typing import Union

from scipy import special

from pairwords.exceptions import DomainError

logger = logging.getLogger(__name__)

Complex = Union[complex, float, int]

LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def _check_pole(z: complex) -> None:
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise DomainError(f"gamma has a pole at {z.real:g}")


def _log_sin_pi(z: complex) -> complex:
    """log sin(pi z) without overflow for large |Im z| (any branch)."""
    w = math.pi * z
    if w.imag > 0.0:
        return -1j * w + cmath.log(1.0 - cmath.exp(2j * w)) + cmath.log(0.5j)
    if w.imag < 0.0:
        return 1j * w + cmath.log(1.0 - cmath.exp(-2j * w)) + cmath.log(-0.5j)
    return cmath.log(cmath.sin(w))


def log_gamma(z: Complex) -> complex:
    """
    A logarithm of Gamma(z); the branch is irrelevant once exponentiated.

    Args:
        z: Argument, not a nonpositive integer

    Returns:
        Complex log Gamma(z)
    """
    z = complex(z)
    _check_pole(z)
    if z.real < 0.5:
        return math.log(math.pi) - _log_sin_pi(z) - log_gamma(1.0 - z)
    z -= 1.0
    x = LANCZOS_COEFFICIENTS[0]
    for k, c in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        x += c / (z + k)
    t = z + LANCZOS_G + 0.5
    return _HALF_LOG_TWO_PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def complex_gamma(z: Complex) -> complex:
    """Gamma(z) for complex z; 0 when the magnitude underflows."""
    lg = log_gamma(z)
    if lg.real < -745.0:
        return 0j
    return cmath.exp(lg)


def digamma(z: Complex) -> complex:
    """psi(z) = Gamma'(z)/Gamma(z) for complex z."""
    z = complex(z)
    _check_pole(z)
    return complex(special.psi(z))


def gamma_derivative(z: Complex) -> complex:
    """Gamma'(z) = Gamma(z) psi(z)."""
    g = complex_gamma(z)
    if g == 0:
        return 0j
    return g * digamma(z)
