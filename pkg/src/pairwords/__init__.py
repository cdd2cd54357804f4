"""
Distinct adjacent pairs in geometric random words.

Exact, asymptotic and simulated laws of the number of distinct adjacent
letter pairs in words with i.i.d. geometric letters.
"""

from pairwords.core.geometric import GeomParams, letter_prob
from pairwords.core.transfer import PairSet
from pairwords.core.words import Word, pair_stats, sample_word
from pairwords.exceptions import (
    BudgetExceededError,
    ConvergenceError,
    DomainError,
    PairwordsError,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "ConvergenceError",
    "DomainError",
    "GeomParams",
    "PairSet",
    "PairwordsError",
    "Word",
    "letter_prob",
    "pair_stats",
    "sample_word",
]
