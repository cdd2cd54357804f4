"""
Enumeration Oracle Module

This module handles exhaustive enumeration over the lumped alphabet
J + {e}. Every letter outside J is merged into the single symbol e, which
leaves avoidance probabilities unchanged, so the sums here are exact up to
floating summation (or exact outright in rational mode). They serve as
the ground truth the faster engines are checked against.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import factorial
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from pairwords.core.geometric import (
    GeomParams,
    MomentResult,
    diagonal_tail,
    letter_prob,
    letter_prob_exact,
    off_diagonal_tail,
    power_sum,
)
from pairwords.core.transfer import Letter, LetterPair, PairSet, Weights
from pairwords.exceptions import BudgetExceededError, DomainError
from pairwords.utils.config_loader import Settings, get_settings

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]
PairsLike = Union[PairSet, Iterable[LetterPair], None]

LUMP = "e"


@dataclass(frozen=True)
class LumpedAlphabet:
    """Tracked letters J plus the lump e carrying P_e = 1 - sum_J P_j."""

    letters: Tuple[Letter, ...]
    probs: Tuple[Number, ...]
    p_e: Number

    @classmethod
    def for_pairs(
        cls,
        params: Optional[GeomParams],
        pairs: PairSet,
        weights: Optional[Weights] = None,
        exact: bool = False,
    ) -> "LumpedAlphabet":
        probs: List[Number] = []
        for j in pairs.letters:
            if weights is not None and j in weights:
                w = weights[j]
                probs.append(Fraction(w) if exact else float(w))
            elif isinstance(j, int) and params is not None:
                probs.append(letter_prob_exact(params, j) if exact else letter_prob(params, j))
            else:
                raise DomainError(f"no probability for letter {j!r}; pass it in weights")
        p_e = (Fraction(1) if exact else 1.0) - sum(probs)
        if p_e <= 0:
            raise DomainError(f"lumped probability P_e = {float(p_e):.3g} must be positive")
        return cls(pairs.letters, tuple(probs), p_e)

    @property
    def symbols(self) -> Tuple[Letter, ...]:
        return (LUMP, *self.letters)

    @property
    def weights(self) -> Tuple[Number, ...]:
        return (self.p_e, *self.probs)

    @property
    def size(self) -> int:
        return len(self.letters) + 1


def _as_pairset(pairs: PairsLike) -> Optional[PairSet]:
    if pairs is None:
        return None
    if isinstance(pairs, PairSet):
        return pairs
    items = frozenset(tuple(p) for p in pairs)
    return PairSet(items) if items else None  # type: ignore[arg-type]


def _check_budget(size: int, n: int, settings: Settings) -> None:
    required = float(size) ** n
    budget = settings.oracle.enumeration_budget
    if required > budget:
        raise BudgetExceededError(
            f"enumeration needs {required:.3g} states, budget is {budget:.3g}",
            required=required,
            budget=budget,
        )


def _walk(alphabet: LumpedAlphabet, forbidden: PairSet, n: int, exact: bool) -> Number:
    """
    Depth-first sum over admissible words, carrying (depth, last, probability).

    The final letter is not expanded: the remaining allowed mass after
    `last` is added in one step.
    """
    weights = alphabet.weights
    size = alphabet.size
    symbols = alphabet.symbols
    allowed = [
        [(symbols[a], symbols[b]) not in forbidden for b in range(size)] for a in range(size)
    ]
    tail_mass = [sum(w for b, w in enumerate(weights) if allowed[a][b]) for a in range(size)]

    total: Number = Fraction(0) if exact else 0.0
    stack: List[Tuple[int, int, Number]] = [(1, a, weights[a]) for a in range(size)]
    while stack:
        depth, last, prob = stack.pop()
        if depth == n:
            total += prob
        elif depth == n - 1:
            total += prob * tail_mass[last]
        else:
            for b in range(size):
                if allowed[last][b]:
                    stack.append((depth + 1, b, prob * weights[b]))
    return total


def avoid_prob_enum(
    params: Optional[GeomParams],
    pairs: PairsLike,
    n: int,
    weights: Optional[Weights] = None,
    exact: bool = False,
    settings: Optional[Settings] = None,
) -> Number:
    """
    Probability that n letters contain none of the pairs, by enumeration.

    Args:
        params: Letter distribution
        pairs: Forbidden pairs (empty means no constraint)
        n: Word length
        weights: Optional probabilities for named or overridden letters
        exact: Rational arithmetic (n <= 10 and |J| <= 3 by default)

    Returns:
        Sum of the probabilities of every admissible lumped word
    """
    try:
        settings = settings or get_settings()
        if n < 0:
            raise DomainError(f"word length must be >= 0, got {n}")
        forbidden = _as_pairset(pairs)
        one: Number = Fraction(1) if exact else 1.0
        if forbidden is None:
            return one

        alphabet = LumpedAlphabet.for_pairs(params, forbidden, weights, exact)
        if exact and (
            n > settings.oracle.exact_max_length
            or len(alphabet.letters) > settings.oracle.exact_max_letters
        ):
            raise DomainError(
                f"exact mode supports n <= {settings.oracle.exact_max_length} and "
                f"|J| <= {settings.oracle.exact_max_letters}"
            )
        if n <= 1:
            return one
        _check_budget(alphabet.size, n, settings)

        value = _walk(alphabet, forbidden, n, exact)
        logger.debug(f"enumerated {alphabet.size}^{n} words for {forbidden}: {float(value):.12g}")
        return value
    except Exception as e:
        logger.error(f"Error enumerating avoidance for {pairs}: {str(e)}")
        raise


def joint_indicator_expectation(
    params: Optional[GeomParams],
    hit: Sequence[LetterPair],
    miss: Sequence[LetterPair],
    n: int,
    weights: Optional[Weights] = None,
    exact: bool = False,
    settings: Optional[Settings] = None,
) -> Number:
    """
    P(every hit pair occurs and no miss pair occurs).

    Inclusion-exclusion over subsets S of the hit set:
    sum_S (-1)^|S| P(avoid S and miss).
    """
    hit = [tuple(p) for p in hit]  # type: ignore[misc]
    miss = [tuple(p) for p in miss]  # type: ignore[misc]
    total: Number = Fraction(0) if exact else 0.0
    for size in range(len(hit) + 1):
        sign = -1 if size % 2 else 1
        for subset in combinations(hit, size):
            avoided = set(subset) | set(miss)
            total += sign * avoid_prob_enum(params, avoided, n, weights, exact, settings)
    return total


def mean_total_enum(
    params: GeomParams,
    n: int,
    which: str = "x2",
    tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> MomentResult:
    """
    E X1, E X2 or E X3 summed pair by pair from enumerated avoidance.

    The infinite alphabet is cut where the union bound E X_{i,j} <= n P_i P_j
    on the discarded pairs drops below tol/2 per class. Reversal symmetry
    E X_{i,j} = E X_{j,i} halves the off-diagonal work.

    Args:
        params: Letter distribution
        n: Word length
        which: 'x1', 'x2' or 'x3'
        tol: Certified bound on the discarded mass
    """
    settings = settings or get_settings()
    which = which.lower()
    if which not in ("x1", "x2", "x3"):
        raise DomainError(f"which must be x1, x2 or x3, got {which!r}")
    tol = tol if tol is not None else settings.exact.default_tolerance
    logger.info(f"enumerating E {which.upper()} at n={n}, p={params.p}, tol={tol:g}")
    if n <= 1:
        return MomentResult(0.0, 0.0, 0, {"diagonal": 0.0, "off_diagonal": 0.0})

    parts: Dict[str, float] = {}
    bounds = 0.0
    terms = 0

    if which in ("x1", "x2"):
        diag = 0.0
        i = 0
        while True:
            i += 1
            diag += 1.0 - float(avoid_prob_enum(params, [(i, i)], n, settings=settings))
            terms += 1
            tail = diagonal_tail(params, n, i)
            if tail < tol / 2:
                break
        parts["diagonal"] = diag
        bounds += tail

    if which in ("x2", "x3"):
        off = 0.0
        u = 2
        while True:
            u += 1
            for i in range(1, (u + 1) // 2):
                j = u - i
                off += 2.0 * (1.0 - float(avoid_prob_enum(params, [(i, j)], n, settings=settings)))
                terms += 2
            tail = off_diagonal_tail(params, n, u)
            if tail < tol / 2:
                break
        parts["off_diagonal"] = off
        bounds += tail

    value = sum(parts.values())
    logger.info(f"E {which.upper()} = {value:.12g} from {terms} pairs")
    return MomentResult(value, bounds, terms, parts)


# Equality patterns


def restricted_growth_strings(n: int) -> Iterator[Tuple[int, ...]]:
    """Set partitions of n positions as restricted growth strings."""
    if n == 0:
        yield ()
        return

    def extend(prefix: List[int], top: int) -> Iterator[Tuple[int, ...]]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            prefix.append(b)
            yield from extend(prefix, max(top, b))
            prefix.pop()

    yield from extend([0], 0)


def _set_partitions(items: Sequence[int]) -> Iterator[List[List[int]]]:
    for rgs in restricted_growth_strings(len(items)):
        groups: Dict[int, List[int]] = {}
        for item, label in zip(items, rgs):
            groups.setdefault(label, []).append(item)
        yield list(groups.values())


@lru_cache(maxsize=None)
def _pattern_polynomial(block_sizes: Tuple[int, ...]) -> Tuple[Tuple[int, Tuple[int, ...]], ...]:
    """
    P(exact equality pattern) as a combination of power-sum products.

    Distinct letters on the blocks are recovered from unrestricted sums by
    Moebius inversion over partitions of the blocks, with weight
    prod (-1)^(c-1) (c-1)! for merged groups of c blocks. Returns
    (coefficient, sorted merged sizes) terms.
    """
    acc: Counter = Counter()
    for grouping in _set_partitions(list(block_sizes)):
        coef = 1
        merged = []
        for group in grouping:
            c = len(group)
            coef *= (-1) ** (c - 1) * factorial(c - 1)
            merged.append(sum(group))
        acc[tuple(sorted(merged))] += coef
    return tuple((c, m) for m, c in acc.items() if c)


def pattern_moments(
    params: GeomParams,
    n: int,
    exact: bool = False,
    settings: Optional[Settings] = None,
) -> Dict[str, Number]:
    """
    Exact first and second moments of X1, X2, X3 for short words.

    Sums over all equality patterns of n positions; each pattern's
    probability depends only on its block sizes and is a polynomial in the
    power sums s_m = sum_i P_i^m, so no alphabet truncation is involved.

    Args:
        params: Letter distribution
        n: Word length, at most oracle.pattern_max_length
        exact: Return Fractions

    Returns:
        Mapping with keys x1, x2, x3, x1_sq, x2_sq, x3_sq
    """
    settings = settings or get_settings()
    if n < 0 or n > settings.oracle.pattern_max_length:
        raise DomainError(
            f"pattern enumeration supports 0 <= n <= {settings.oracle.pattern_max_length}, got {n}"
        )
    logger.info(f"pattern moments at n={n}, p={params.p}")

    sums: Dict[int, Number] = {}

    def s(m: int) -> Number:
        if m not in sums:
            sums[m] = power_sum(params, m, exact=exact)
        return sums[m]

    zero: Number = Fraction(0) if exact else 0.0
    keys = ("x1", "x2", "x3", "x1_sq", "x2_sq", "x3_sq")
    out: Dict[str, Number] = {k: zero for k in keys}
    for rgs in restricted_growth_strings(n):
        sizes = tuple(sorted(Counter(rgs).values()))
        prob = zero
        for coef, merged in _pattern_polynomial(sizes):
            term: Number = coef
            for m in merged:
                term = term * s(m)
            prob += term
        distinct = set(zip(rgs, rgs[1:]))
        x1 = sum(1 for a, b in distinct if a == b)
        x2 = len(distinct)
        x3 = x2 - x1
        for key, x in (("x1", x1), ("x2", x2), ("x3", x3)):
            out[key] += prob * x
            out[f"{key}_sq"] += prob * x * x
    return out
