"""
Monte Carlo Module

This module handles the simulation harness: N independent geometric words
of length n, their distinct-pair counts X1, X2, X3, the sample moments and
histograms, and the comparisons of those samples against the limit laws.

Every word draws from its own substream seeded by (seed, word index), so a
run is bit-identical for any number of workers.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from pairwords.core.geometric import GeomParams
from pairwords.core.limit_law import centre, gaussian_x3, limit_density_f
from pairwords.core.words import Pair, count_pair, distinct_counts, sample_word
from pairwords.exceptions import BudgetExceededError, DomainError
from pairwords.utils.config_loader import Settings, get_settings

logger = logging.getLogger(__name__)

STATISTICS = ("x1", "x2", "x3")


@dataclass(frozen=True)
class SimResult:
    """Per-word samples of X1, X2, X3 for one simulated batch."""

    n: int
    N: int
    seed: int
    p: float
    samples: Dict[str, np.ndarray]
    clamped: int = 0
    workers: int = 1

    def _column(self, which: str) -> np.ndarray:
        if which not in self.samples:
            raise DomainError(f"unknown statistic {which!r}; expected one of {STATISTICS}")
        return self.samples[which]

    def mean(self, which: str) -> float:
        """Sample mean (1/N) sum X."""
        return float(np.mean(self._column(which)))

    def variance(self, which: str) -> float:
        """Unbiased sample variance with 1/(N-1) normalization."""
        return float(np.var(self._column(which), ddof=1))

    def standard_error(self, which: str) -> float:
        return math.sqrt(self.variance(which) / self.N)

    def histogram(self, which: str) -> Dict[int, int]:
        """value -> count; the counts add up to N."""
        values, counts = np.unique(self._column(which), return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


def resolve_workers(workers: Optional[int], settings: Settings) -> int:
    """
    Worker count: the argument, else PAIRWORDS_THREADS, else the CPU count.

    PAIRWORDS_THREADS also caps an explicit argument.
    """
    cap = settings.simulation.workers
    chosen = workers or cap or os.cpu_count() or 1
    if cap is not None:
        chosen = min(chosen, cap)
    if chosen < 1:
        raise DomainError(f"workers must be >= 1, got {chosen}")
    return chosen


def _simulate_chunk(
    params: GeomParams,
    n: int,
    seed: int,
    indices: range,
    max_letter: int,
    out: np.ndarray,
) -> int:
    """Fill rows `indices` of out with (x1, x2); returns the clamped-letter count."""
    clamped = 0
    for index in indices:
        rng = np.random.default_rng([seed, index])
        word = sample_word(params, n, rng, max_letter)
        clamped += word.clamped
        out[index] = distinct_counts(word.letters)
    return clamped


def simulate(
    params: GeomParams,
    n: int,
    N: int,
    seed: int,
    workers: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> SimResult:
    """
    Simulate N words of length n and record X1, X2, X3 per word.

    Args:
        params: Letter distribution
        n: Word length (>= 0)
        N: Number of words (>= 2)
        seed: Master seed; word k uses the substream (seed, k)
        workers: Thread count; defaults to PAIRWORDS_THREADS or the CPU count

    Returns:
        SimResult whose samples are independent of the worker count
    """
    try:
        settings = settings or get_settings()
        if n < 0:
            raise DomainError(f"word length must be >= 0, got {n}")
        if N < 2:
            raise DomainError(f"at least two words are needed for a sample variance, got {N}")
        if seed < 0:
            raise DomainError(f"seed must be >= 0, got {seed}")
        required = float(n) * float(N)
        budget = settings.simulation.max_total_letters
        if required > budget:
            raise BudgetExceededError(
                f"simulation needs {required:.3g} letters, budget is {budget:.3g}",
                required=int(required),
                budget=int(budget),
            )

        workers = resolve_workers(workers, settings)
        max_letter = settings.simulation.max_letter
        logger.info(f"Simulating {N} words of length {n} at p={params.p} ({workers} workers)")

        counts = np.zeros((N, 2), dtype=np.int64)
        chunk = max(1, math.ceil(N / (4 * workers)))
        ranges = [range(start, min(start + chunk, N)) for start in range(0, N, chunk)]
        if workers == 1:
            clamped = sum(
                _simulate_chunk(params, n, seed, r, max_letter, counts) for r in ranges
            )
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(_simulate_chunk, params, n, seed, r, max_letter, counts)
                    for r in ranges
                ]
                clamped = sum(f.result() for f in futures)

        x1, x2 = counts[:, 0].copy(), counts[:, 1].copy()
        for column in (x1, x2):
            column.setflags(write=False)
        x3 = x2 - x1
        x3.setflags(write=False)
        if clamped:
            logger.warning(f"{clamped} letter(s) clamped at {max_letter} during simulation")

        result = SimResult(
            n=n,
            N=N,
            seed=seed,
            p=params.p,
            samples={"x1": x1, "x2": x2, "x3": x3},
            clamped=clamped,
            workers=workers,
        )
        logger.info(
            f"Simulation done: mean X1={result.mean('x1'):.4f}, mean X3={result.mean('x3'):.4f}"
        )
        return result
    except Exception as e:
        logger.error(f"Error simulating words: {str(e)}")
        raise


def histogram_vs_density(
    result: SimResult,
    which: str,
    params: GeomParams,
    tol: Optional[float] = None,
) -> List[Dict[str, float]]:
    """
    Empirical frequencies next to the limit law, one row per observed value.

    X1 is compared with f(value - i*(n)); X3 with the Gaussian density of
    mean mean_x3 and variance var_x3. X2 rows carry no theory column.

    Returns:
        Rows with keys value, empirical, theory
    """
    hist = result.histogram(which)
    rows: List[Dict[str, float]] = []
    if which == "x1":
        mid = centre(params, result.n)
        for value, count in hist.items():
            rows.append(
                {
                    "value": value,
                    "empirical": count / result.N,
                    "theory": limit_density_f(params, value - mid, tol),
                }
            )
    elif which == "x3":
        law = gaussian_x3(result.n, params)
        for value, count in hist.items():
            rows.append(
                {"value": value, "empirical": count / result.N, "theory": float(law.pdf(value))}
            )
    else:
        for value, count in hist.items():
            rows.append({"value": value, "empirical": count / result.N, "theory": math.nan})
    return rows


def max_deviation(rows: Sequence[Dict[str, float]]) -> float:
    """Largest |empirical - theory| over the rows."""
    return max((abs(r["empirical"] - r["theory"]) for r in rows), default=0.0)


def occurrence_histogram(
    params: GeomParams,
    n: int,
    N: int,
    seed: int,
    pair: Pair,
    settings: Optional[Settings] = None,
) -> Dict[int, int]:
    """
    Simulated law of the number of occurrences of one pair.

    Uses the same (seed, index) substreams as simulate, so the words are
    the ones a simulate call with the same seed would see.
    """
    settings = settings or get_settings()
    if N < 1:
        raise DomainError(f"number of words must be >= 1, got {N}")
    max_letter = settings.simulation.max_letter
    counts: Dict[int, int] = {}
    for index in range(N):
        rng = np.random.default_rng([seed, index])
        word = sample_word(params, n, rng, max_letter)
        m = count_pair(word.letters, pair)
        counts[m] = counts.get(m, 0) + 1
    logger.debug(f"occurrences of {pair} over {N} words: {dict(sorted(counts.items()))}")
    return dict(sorted(counts.items()))


def ks_distance_gaussian(result: SimResult, params: GeomParams) -> float:
    """Kolmogorov-Smirnov distance between the X3 sample and N(mean_x3, var_x3)."""
    law = gaussian_x3(result.n, params)
    statistic = stats.kstest(result.samples["x3"], law.cdf).statistic
    return float(statistic)


def letter_chisquare(
    params: GeomParams,
    letters: np.ndarray,
    max_letter: Optional[int] = None,
    min_expected: float = 5.0,
) -> Tuple[float, float]:
    """
    Chi-square goodness of fit of letter frequencies to the geometric law.

    Letters 1..K get their own bins, where K is the last letter whose
    expected count reaches min_expected; everything above K shares a tail bin.

    Returns:
        (statistic, p-value)
    """
    letters = np.asarray(letters, dtype=np.int64).reshape(-1)
    total = letters.size
    if total == 0:
        raise DomainError("no letters to test")
    last = 1
    while total * params.letter_prob(last + 1) >= min_expected:
        last += 1
    if max_letter is not None:
        last = min(last, max_letter - 1)

    observed = np.bincount(np.minimum(letters, last + 1), minlength=last + 2)[1:].astype(float)
    expected = total * np.array(
        [params.letter_prob(i) for i in range(1, last + 1)] + [params.q**last]
    )
    result = stats.chisquare(observed, expected * observed.sum() / expected.sum())
    logger.debug(f"letter chi-square over {last + 1} bins: {result.statistic:.3f}")
    return float(result.statistic), float(result.pvalue)
