"""
Geometric Letter Distribution Module

This module holds the letter law P_i = p q^(i-1) shared by every engine,
together with the geometric tail bounds used when an infinite alphabet
sum is truncated.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from pairwords.exceptions import DomainError

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]


class GeomParams(BaseModel):
    """Letter distribution of a geometric word."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(..., gt=0.0, lt=1.0)

    @field_validator("p", mode="before")
    @classmethod
    def _accept_fractions(cls, value: Any) -> Any:
        if isinstance(value, Fraction):
            return float(value)
        if isinstance(value, str) and "/" in value:
            return float(Fraction(value.strip()))
        return value

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def p_exact(self) -> Fraction:
        """Rational form of p (recovers 1/3, 2/3, ... from their float)."""
        return Fraction(self.p).limit_denominator(10**9)

    @property
    def q_exact(self) -> Fraction:
        return 1 - self.p_exact

    def letter_prob(self, i: int) -> float:
        return letter_prob(self, i)

    def letter_prob_exact(self, i: int) -> Fraction:
        return letter_prob_exact(self, i)


def letter_prob(params: GeomParams, i: int) -> float:
    """
    Probability of letter i.

    Args:
        params: Letter distribution
        i: Letter index, i >= 1

    Returns:
        p * q^(i-1)
    """
    if i < 1:
        raise DomainError(f"letter index must be >= 1, got {i}")
    return params.p * params.q ** (i - 1)


def letter_prob_exact(params: GeomParams, i: int) -> Fraction:
    """Rational version of letter_prob."""
    if i < 1:
        raise DomainError(f"letter index must be >= 1, got {i}")
    return params.p_exact * params.q_exact ** (i - 1)


def letter_probs(params: GeomParams, count: int) -> np.ndarray:
    """P_1 .. P_count as an array."""
    return params.p * params.q ** np.arange(count, dtype=float)


def power_sum(params: GeomParams, m: int, exact: bool = False) -> Number:
    """
    Sum of P_i^m over all letters, p^m / (1 - q^m).

    Args:
        params: Letter distribution
        m: Power, m >= 1
        exact: Return a Fraction instead of a float
    """
    if m < 1:
        raise DomainError(f"power must be >= 1, got {m}")
    if exact:
        return params.p_exact**m / (1 - params.q_exact**m)
    return params.p**m / -math.expm1(m * math.log1p(-params.p))


# Truncation of the infinite alphabet


@dataclass(frozen=True)
class MomentResult:
    """A truncated infinite sum reported with its certified remainder."""

    value: float
    tail_bound: float
    terms_used: int
    parts: Dict[str, float] = field(default_factory=dict)


def diagonal_tail(params: GeomParams, n: int, last: int) -> float:
    """n * sum_{i > last} P_i^2, the union bound on the discarded (i,i) terms."""
    q2 = params.q**2
    return n * params.p**2 * q2**last / (1.0 - q2)


def weighted_index_tail(q: float, last: int) -> float:
    """sum_{u > last} (u - 1) q^u in closed form."""
    m = last + 1
    first = q**m * (m - (m - 1) * q) / (1.0 - q) ** 2
    plain = q**m / (1.0 - q)
    return first - plain


def off_diagonal_tail(params: GeomParams, n: int, last_sum: int) -> float:
    """
    Union bound on sum of E X_{i,j} over pairs with i + j > last_sum.

    Uses P_i P_j = (p/q)^2 q^(i+j) and at most u - 1 ordered pairs per u.
    """
    ratio = (params.p / params.q) ** 2
    return n * ratio * weighted_index_tail(params.q, last_sum)
