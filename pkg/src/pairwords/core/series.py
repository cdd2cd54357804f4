"""
Truncated Power Series Module

This module handles multivariate power series in the letter probabilities
{P_j : j in J} with exact rational coefficients, truncated at a total
degree K, and runs the eigenvector iteration for lambda1, beta, mu and C1
in that arithmetic.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from pairwords.core.transfer import Letter, PairSet
from pairwords.exceptions import DomainError

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Scalar = Union[int, Fraction]


class MultiSeries:
    """Sparse truncated power series {exponent vector: Fraction}."""

    __slots__ = ("variables", "order", "terms")

    def __init__(
        self,
        variables: Sequence[Letter],
        order: int,
        terms: Optional[Mapping[Monomial, Scalar]] = None,
    ):
        if order < 0:
            raise DomainError(f"truncation order must be >= 0, got {order}")
        self.variables: Tuple[Letter, ...] = tuple(variables)
        self.order = order
        self.terms: Dict[Monomial, Fraction] = {}
        for mono, coef in (terms or {}).items():
            if len(mono) != len(self.variables):
                raise DomainError(f"monomial {mono} does not match {len(self.variables)} variables")
            if sum(mono) <= order and coef != 0:
                self.terms[tuple(mono)] = Fraction(coef)

    # construction

    @classmethod
    def constant(cls, variables: Sequence[Letter], order: int, value: Scalar) -> "MultiSeries":
        return cls(variables, order, {(0,) * len(variables): value})

    @classmethod
    def variable(cls, variables: Sequence[Letter], order: int, name: Letter) -> "MultiSeries":
        variables = tuple(variables)
        mono = tuple(1 if v == name else 0 for v in variables)
        if sum(mono) != 1:
            raise DomainError(f"unknown variable {name!r}")
        return cls(variables, order, {mono: 1})

    def _like(self, terms: Mapping[Monomial, Scalar]) -> "MultiSeries":
        return MultiSeries(self.variables, self.order, terms)

    def _coerce(self, other: Union["MultiSeries", Scalar]) -> "MultiSeries":
        if isinstance(other, MultiSeries):
            if other.variables != self.variables:
                raise DomainError("series over different variables")
            return other
        if isinstance(other, (int, Fraction)):
            return MultiSeries.constant(self.variables, self.order, other)
        raise TypeError(f"cannot combine MultiSeries with {type(other).__name__}")

    # arithmetic

    def __add__(self, other: Union["MultiSeries", Scalar]) -> "MultiSeries":
        other = self._coerce(other)
        out = dict(self.terms)
        for mono, coef in other.terms.items():
            out[mono] = out.get(mono, Fraction(0)) + coef
        return MultiSeries(self.variables, min(self.order, other.order), out)

    __radd__ = __add__

    def __neg__(self) -> "MultiSeries":
        return self._like({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Union["MultiSeries", Scalar]) -> "MultiSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Scalar) -> "MultiSeries":
        return self._coerce(other) - self

    def __mul__(self, other: Union["MultiSeries", Scalar]) -> "MultiSeries":
        if isinstance(other, (int, Fraction)):
            return self._like({m: c * other for m, c in self.terms.items()})
        other = self._coerce(other)
        order = min(self.order, other.order)
        out: Dict[Monomial, Fraction] = {}
        right = [(m, c, sum(m)) for m, c in other.terms.items()]
        for m1, c1 in self.terms.items():
            d1 = sum(m1)
            for m2, c2, d2 in right:
                if d1 + d2 > order:
                    continue
                mono = tuple(a + b for a, b in zip(m1, m2))
                out[mono] = out.get(mono, Fraction(0)) + c1 * c2
        return MultiSeries(self.variables, order, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "MultiSeries":
        if exponent < 0:
            return self.reciprocal() ** (-exponent)
        result = MultiSeries.constant(self.variables, self.order, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def reciprocal(self) -> "MultiSeries":
        """1/(c0 + h) = (1/c0) sum_k (-h/c0)^k, exact through the order."""
        c0 = self.constant_term
        if c0 == 0:
            raise DomainError("reciprocal of a series with zero constant term")
        h = self - c0
        ratio = h * Fraction(-1, 1) * (1 / c0)
        total = MultiSeries.constant(self.variables, self.order, 1)
        power = MultiSeries.constant(self.variables, self.order, 1)
        for _ in range(self.order):
            power = power * ratio
            if not power.terms:
                break
            total = total + power
        return total * (1 / c0)

    def __truediv__(self, other: Union["MultiSeries", Scalar]) -> "MultiSeries":
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / other)
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other: Scalar) -> "MultiSeries":
        return self._coerce(other) * self.reciprocal()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MultiSeries.constant(self.variables, self.order, other)
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.variables, frozenset(self.terms.items())))

    # inspection

    @property
    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.variables), Fraction(0))

    def coefficient(self, exponents: Union[Monomial, Mapping[Letter, int]]) -> Fraction:
        if isinstance(exponents, Mapping):
            exponents = tuple(int(exponents.get(v, 0)) for v in self.variables)
        return self.terms.get(tuple(exponents), Fraction(0))

    def truncate(self, order: int) -> "MultiSeries":
        return MultiSeries(self.variables, min(order, self.order), self.terms)

    def evaluate(self, values: Mapping[Letter, Union[float, Fraction]]) -> Union[float, Fraction]:
        total: Union[float, Fraction] = 0
        for mono, coef in self.terms.items():
            term: Union[float, Fraction] = coef
            for var, e in zip(self.variables, mono):
                if e:
                    term = term * values[var] ** e
            total = total + term
        return total

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        """Graded lexicographic order: by total degree, then exponents descending."""
        return sorted(self.terms.items(), key=lambda mc: (sum(mc[0]), [-e for e in mc[0]]))

    def to_string(self, prefix: str = "P") -> str:
        """Canonical text form, e.g. '1 - Pi^2 + Pi^3 - 2*Pi^4'."""
        pieces: List[str] = []
        for mono, coef in self.sorted_terms():
            factors = []
            for var, e in zip(self.variables, mono):
                if e == 1:
                    factors.append(f"{prefix}{var}")
                elif e > 1:
                    factors.append(f"{prefix}{var}^{e}")
            magnitude = abs(coef)
            if not factors:
                body = str(magnitude)
            elif magnitude == 1:
                body = "*".join(factors)
            else:
                body = f"{magnitude}*" + "*".join(factors)
            if not pieces:
                pieces.append(body if coef > 0 else f"-{body}")
            else:
                pieces.append(("+ " if coef > 0 else "- ") + body)
        return " ".join(pieces) if pieces else "0"

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"MultiSeries({self.to_string()!r}, order={self.order})"


def letter_variables(pairs: PairSet, order: int) -> Dict[Letter, MultiSeries]:
    """One series variable P_j per letter of J."""
    variables = pairs.letters
    return {j: MultiSeries.variable(variables, order, j) for j in variables}


def polynomial(
    pairs: PairSet, order: int, terms: Iterable[Tuple[Scalar, Mapping[Letter, int]]]
) -> MultiSeries:
    """Build a series from (coefficient, {letter: exponent}) terms."""
    variables = pairs.letters
    out: Dict[Monomial, Fraction] = {}
    for coef, exps in terms:
        mono = tuple(int(exps.get(v, 0)) for v in variables)
        out[mono] = out.get(mono, Fraction(0)) + Fraction(coef)
    return MultiSeries(variables, order, out)


@dataclass(frozen=True)
class Algorithm1Result:
    lambda1: MultiSeries
    beta: Dict[Letter, MultiSeries]
    mu: Dict[Letter, MultiSeries]
    c1: MultiSeries


def algorithm1_series(pairs: PairSet, order: int) -> Algorithm1Result:
    """
    Series for lambda1, beta, mu and C1 in the symbols P_j.

    Runs exactly `order` rounds of
        beta   <- (beta Pi + p) / lambda
        lambda <- P_e (1 + beta 1)
        mu     <- (Pi mu + 1) / lambda
    starting from lambda = 1, beta = 0, mu = 1, where Pi is the J x J
    block of the transfer matrix and P_e = 1 - sum P_j. Each round raises
    the order of agreement with the true eigen-quantities by one, so the
    output is exact through total degree `order`.

    Args:
        pairs: Forbidden pairs; letters act as symbols
        order: Truncation degree K >= 0

    Returns:
        Algorithm1Result with C1 = (1 + beta 1)/(1 + P_e beta mu)
    """
    try:
        if order < 0:
            raise DomainError(f"order must be >= 0, got {order}")
        letters = pairs.letters
        P = letter_variables(pairs, order)
        one = MultiSeries.constant(letters, order, 1)
        zero = MultiSeries(letters, order)
        p_e = one - sum((P[j] for j in letters), zero)

        # block[k][m] is P_m unless (k, m) is forbidden
        block = {k: {m: (zero if (k, m) in pairs else P[m]) for m in letters} for k in letters}

        lam = one
        beta = {j: zero for j in letters}
        mu = {j: one for j in letters}
        for step in range(order):
            inv = lam.reciprocal()
            beta = {
                m: (sum((beta[k] * block[k][m] for k in letters), zero) + P[m]) * inv
                for m in letters
            }
            lam = p_e * (one + sum(beta.values(), zero))
            inv = lam.reciprocal()
            mu = {
                k: (sum((block[k][m] * mu[m] for m in letters), zero) + one) * inv
                for k in letters
            }
            logger.debug(f"round {step + 1}: lambda has {len(lam.terms)} terms")

        beta_sum = sum(beta.values(), zero)
        beta_mu = sum((beta[j] * mu[j] for j in letters), zero)
        c1 = (one + beta_sum) / (one + p_e * beta_mu)
        logger.info(f"series for {pairs} through order {order}: lambda={lam}")
        return Algorithm1Result(lam, beta, mu, c1)
    except Exception as e:
        logger.error(f"Error computing series for {pairs}: {str(e)}")
        raise


def psi_symbolic(pairs: PairSet, order: int, count: int) -> List[MultiSeries]:
    """
    psi_1 .. psi_count as series: psi_1 = sum P_j, psi_{k+1} = p M^k 1.

    M is the cluster matrix, M[k][m] = P_m on forbidden (k, m).
    """
    letters = pairs.letters
    P = letter_variables(pairs, order)
    zero = MultiSeries(letters, order)
    one = MultiSeries.constant(letters, order, 1)
    vec = {j: one for j in letters}
    out: List[MultiSeries] = []
    for _ in range(count):
        out.append(sum((P[j] * vec[j] for j in letters), zero))
        vec = {k: sum((P[m] * vec[m] for m in letters if (k, m) in pairs), zero) for k in letters}
    return out
