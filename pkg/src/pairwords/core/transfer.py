"""
Transfer Matrix Module

This module handles pair-avoidance probabilities through the substochastic
transfer matrix over the lumped alphabet {e} + J, its Perron root and the
constant C1 in P(avoid) ~ C1 * lambda1^n.
"""

import logging
import math
from dataclasses import dataclass
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Tuple,
    Union,
)

import numpy as np
from scipy.optimize import brentq

from pairwords.core.geometric import GeomParams, letter_prob
from pairwords.exceptions import ConvergenceError, DomainError
from pairwords.utils.config_loader import Settings, get_settings

logger = logging.getLogger(__name__)

Letter = Union[int, str]
LetterPair = Tuple[Letter, Letter]
Weights = Mapping[Letter, float]


def letter_key(letter: Letter) -> Tuple[int, int, str]:
    """Sort key: integer letters ascending, then named letters."""
    if isinstance(letter, str):
        return (1, 0, letter)
    return (0, int(letter), "")


@dataclass(frozen=True)
class PairSet:
    """A non-empty set of forbidden (or tracked) ordered pairs."""

    pairs: FrozenSet[LetterPair]

    def __post_init__(self) -> None:
        if not self.pairs:
            raise DomainError("a pair set must be non-empty")
        for a, b in self.pairs:
            for letter in (a, b):
                if isinstance(letter, bool) or not isinstance(letter, (int, str)):
                    raise DomainError(f"letters must be ints or names, got {letter!r}")
                if isinstance(letter, int) and letter < 1:
                    raise DomainError(f"letter index must be >= 1, got {letter}")

    @classmethod
    def of(cls, *pairs: LetterPair) -> "PairSet":
        return cls(frozenset(tuple(p) for p in pairs))  # type: ignore[misc]

    @classmethod
    def identical(cls, letters: Iterable[Letter]) -> "PairSet":
        """The pair set {(i,i) : i in letters}."""
        return cls(frozenset((i, i) for i in letters))

    @property
    def letters(self) -> Tuple[Letter, ...]:
        """J, the sorted union of all coordinates."""
        support = {a for a, _ in self.pairs} | {b for _, b in self.pairs}
        return tuple(sorted(support, key=letter_key))

    @property
    def sorted_pairs(self) -> List[LetterPair]:
        return sorted(self.pairs, key=lambda ab: (letter_key(ab[0]), letter_key(ab[1])))

    @property
    def size(self) -> int:
        return len(self.pairs)

    def is_symbolic(self) -> bool:
        return any(isinstance(j, str) for j in self.letters)

    def union(self, other: "PairSet") -> "PairSet":
        return PairSet(self.pairs | other.pairs)

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def __iter__(self) -> Iterator[LetterPair]:
        return iter(self.sorted_pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __str__(self) -> str:
        return ",".join(f"({a},{b})" for a, b in self.sorted_pairs)


def resolve_weights(
    params: Optional[GeomParams], pairs: PairSet, weights: Optional[Weights] = None
) -> Dict[Letter, float]:
    """
    Probability of each letter of J.

    Explicit weights win; integer letters fall back to the geometric law.
    """
    resolved: Dict[Letter, float] = {}
    for j in pairs.letters:
        if weights is not None and j in weights:
            resolved[j] = float(weights[j])
        elif isinstance(j, int) and params is not None:
            resolved[j] = letter_prob(params, j)
        else:
            raise DomainError(f"no probability for letter {j!r}; pass it in weights")
    return resolved


@dataclass(frozen=True)
class TransferMatrix:
    """Pi-bar over {e} + J (e first, J ascending)."""

    index: Tuple[Letter, ...]
    matrix: np.ndarray
    p_e: float

    @property
    def dim(self) -> int:
        return len(self.index)

    @property
    def start(self) -> np.ndarray:
        """Initial row vector pi, the unit vector at e."""
        pi = np.zeros(self.dim)
        pi[0] = 1.0
        return pi


def transfer_from_weights(weights: Weights, pairs: PairSet) -> TransferMatrix:
    """
    Build the transfer matrix for arbitrary letter weights.

    Args:
        weights: Probability of each letter in J
        pairs: Forbidden pairs

    Returns:
        TransferMatrix with entry(k, m) = 0 for forbidden (k, m), else P_m
    """
    letters = pairs.letters
    w = np.array([float(weights[j]) for j in letters])
    p_e = 1.0 - float(w.sum())
    if p_e <= 0.0:
        raise DomainError(f"lumped probability P_e = {p_e:.3g} must be positive")

    d = len(letters) + 1
    position = {j: k + 1 for k, j in enumerate(letters)}
    matrix = np.empty((d, d))
    matrix[:, 0] = p_e
    matrix[:, 1:] = w
    for a, b in pairs.pairs:
        matrix[position[a], position[b]] = 0.0
    return TransferMatrix(("e", *letters), matrix, p_e)


def build_transfer(
    params: GeomParams, pairs: PairSet, weights: Optional[Weights] = None
) -> TransferMatrix:
    """Transfer matrix for geometric letter probabilities."""
    return transfer_from_weights(resolve_weights(params, pairs, weights), pairs)


def _avoid_from_matrix(matrix: np.ndarray, n: int, settings: Settings) -> float:
    if n < 0:
        raise DomainError(f"word length must be >= 0, got {n}")
    v = np.zeros(matrix.shape[0])
    v[0] = 1.0
    if n > settings.exact.fast_path_threshold:
        v = v @ np.linalg.matrix_power(matrix, n)
    else:
        for _ in range(n):
            v = v @ matrix
    return float(v.sum())


def avoid_prob_from_weights(
    weights: Weights, pairs: PairSet, n: int, settings: Optional[Settings] = None
) -> float:
    """pi Pi-bar^n 1 for arbitrary letter weights."""
    settings = settings or get_settings()
    return _avoid_from_matrix(transfer_from_weights(weights, pairs).matrix, n, settings)


def avoid_prob_matrix(
    params: GeomParams,
    pairs: PairSet,
    n: int,
    weights: Optional[Weights] = None,
    settings: Optional[Settings] = None,
) -> float:
    """
    Probability that a word of length n contains none of the pairs.

    Args:
        params: Letter distribution
        pairs: Forbidden pairs
        n: Word length
        weights: Optional probabilities overriding the geometric law

    Returns:
        pi Pi-bar^n 1
    """
    try:
        settings = settings or get_settings()
        tm = build_transfer(params, pairs, weights)
        value = _avoid_from_matrix(tm.matrix, n, settings)
        logger.debug(f"avoid {pairs} n={n}: {value:.6g}")
        return value
    except Exception as e:
        logger.error(f"Error computing avoidance probability for {pairs}: {str(e)}")
        raise


class DominantEigen(NamedTuple):
    lambda1: float
    c1: float


def _power_iteration(matrix: np.ndarray, tol: float, max_iter: int) -> Tuple[np.ndarray, int]:
    x = np.full(matrix.shape[0], 1.0 / matrix.shape[0])
    for it in range(1, max_iter + 1):
        y = matrix @ x
        y /= y.sum()
        if np.max(np.abs(y - x)) <= tol * np.max(np.abs(y)):
            return y, it
        x = y
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} steps",
        diagnostic=_gap_diagnostic(matrix),
    )


def _gap_diagnostic(matrix: np.ndarray) -> Dict[str, float]:
    values = np.linalg.eigvals(matrix)
    mags = np.sort(np.abs(values))[::-1]
    second = float(mags[1]) if mags.size > 1 else 0.0
    return {"lambda1": float(mags[0]), "lambda2": second, "gap_ratio": second / float(mags[0])}


def _eigen_from_matrix(
    tm: TransferMatrix, settings: Settings
) -> Tuple[float, float, np.ndarray, np.ndarray]:
    tol = settings.numerics.eigen_tolerance
    cap = settings.numerics.eigen_max_iterations
    v, it_right = _power_iteration(tm.matrix, tol, cap)
    u, it_left = _power_iteration(tm.matrix.T, tol, cap)
    logger.debug(f"power iteration converged after {it_right}/{it_left} steps")

    # u = [1, beta], v = [1/P_e, mu]
    u = u / u[0]
    v = v / (v[0] * tm.p_e)
    lam = float(u @ tm.matrix @ v) / float(u @ v)
    c1 = float(v[0] * u.sum() / (u @ v))
    return lam, c1, u, v


def dominant_eigen_from_weights(
    weights: Weights, pairs: PairSet, settings: Optional[Settings] = None
) -> DominantEigen:
    """Perron root and C1 for arbitrary letter weights."""
    settings = settings or get_settings()
    lam, c1, _, _ = _eigen_from_matrix(transfer_from_weights(weights, pairs), settings)
    return DominantEigen(lam, c1)


def dominant_eigen(
    params: GeomParams,
    pairs: PairSet,
    weights: Optional[Weights] = None,
    settings: Optional[Settings] = None,
) -> DominantEigen:
    """
    Perron root lambda1 of Pi-bar and the constant C1.

    C1 = (pi v)(u 1)/(u v) = (1 + beta 1)/(1 + P_e beta mu) with the left
    and right eigenvectors normalized as u = [1, beta], v = [1/P_e, mu].
    """
    try:
        settings = settings or get_settings()
        tm = build_transfer(params, pairs, weights)
        lam, c1, _, _ = _eigen_from_matrix(tm, settings)
        logger.info(f"dominant eigen for {pairs}: lambda1={lam:.15g}, C1={c1:.15g}")
        return DominantEigen(lam, c1)
    except Exception as e:
        logger.error(f"Error computing dominant eigenvalue for {pairs}: {str(e)}")
        raise


def identical_pairs_eigen(
    params: GeomParams,
    letters: Iterable[int],
    tol: Optional[float] = None,
    weights: Optional[Weights] = None,
    settings: Optional[Settings] = None,
) -> DominantEigen:
    """
    lambda1 and C1 for the pair set {(i,i) : i in letters}.

    lambda1 is the root of lambda = 1 - sum P_i^2/(lambda + P_i) in
    [1 - 2 eps, 1], eps = sum P_i^2, found by brentq and polished by Newton;
    C1 = 1/(1 - sum P_i^2/(lambda1 + P_i)^2). The bracket needs eps <= 1/4.
    """
    settings = settings or get_settings()
    pairs = PairSet.identical(letters)
    w = resolve_weights(params, pairs, weights)
    probs = np.array([w[j] for j in pairs.letters])
    if probs.sum() >= 1.0:
        raise DomainError(f"lumped probability P_e = {1.0 - probs.sum():.3g} must be positive")
    eps = float(np.sum(probs**2))

    if eps > 0.25:
        logger.warning(f"eps={eps:.4g} outside (0, 1/4]; using the power-iteration route")
        return dominant_eigen(params, pairs, weights, settings)

    def g(lam: float) -> float:
        return lam - 1.0 + float(np.sum(probs**2 / (lam + probs)))

    def dg(lam: float) -> float:
        return 1.0 - float(np.sum(probs**2 / (lam + probs) ** 2))

    xtol = tol if tol is not None else settings.numerics.fixed_point_tolerance
    lam = brentq(g, 1.0 - 2.0 * eps, 1.0, xtol=xtol, rtol=4 * np.finfo(float).eps)
    for _ in range(settings.numerics.newton_polish_steps):
        step = g(lam) / dg(lam)
        lam -= step
        if abs(step) <= 1e-17:
            break
    c1 = 1.0 / dg(lam)
    logger.debug(f"identical pairs {pairs.letters}: eps={eps:.4g}, lambda1={lam:.15g}")
    return DominantEigen(float(lam), float(c1))


def spectrum(
    params: GeomParams, pairs: PairSet, weights: Optional[Weights] = None
) -> np.ndarray:
    """All eigenvalues of Pi-bar, largest real part first."""
    values = np.linalg.eigvals(build_transfer(params, pairs, weights).matrix)
    return values[np.argsort(-values.real)]


@dataclass(frozen=True)
class EigenDiagnostics:
    lambda1: float
    lambda2: complex
    gap_ratio: float
    c1: float
    phi_n: float


def eigen_diagnostics(
    params: GeomParams,
    pairs: PairSet,
    n: int,
    weights: Optional[Weights] = None,
    settings: Optional[Settings] = None,
) -> EigenDiagnostics:
    """Second eigenvalue, spectral gap and the residual P(avoid)/(C1 lambda1^n)."""
    settings = settings or get_settings()
    lam, c1 = dominant_eigen(params, pairs, weights, settings)
    values = np.linalg.eigvals(build_transfer(params, pairs, weights).matrix)
    ordered = values[np.argsort(-np.abs(values))]
    second = complex(ordered[1]) if ordered.size > 1 else 0j
    phi = avoid_prob_matrix(params, pairs, n, weights, settings) / (c1 * lam**n)
    return EigenDiagnostics(lam, second, abs(second) / lam, c1, phi)


def avoid_prob_bound(
    params: GeomParams, pairs: PairSet, n: int, weights: Optional[Weights] = None
) -> float:
    """delta^(-1/2) exp(-eps n / 2) with delta = P_e and eps = psi_2."""
    w = resolve_weights(params, pairs, weights)
    delta = 1.0 - sum(w.values())
    if delta <= 0.0:
        raise DomainError(f"lumped probability P_e = {delta:.3g} must be positive")
    eps = sum(w[a] * w[b] for a, b in pairs.pairs)
    return math.exp(-eps * n / 2.0) / math.sqrt(delta)
