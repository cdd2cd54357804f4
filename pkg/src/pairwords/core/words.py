"""
Word Sampling Module

This module handles geometric word sampling and the per-word pair
statistics X1 (distinct (i,i) pairs), X2 (distinct pairs) and X3 = X2 - X1.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional, Tuple, Union

import numpy as np

from pairwords.core.geometric import GeomParams
from pairwords.exceptions import DomainError
from pairwords.utils.config_loader import get_settings

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]

# packed keys a * base + b must stay inside int64
_PACK_LIMIT = 3_000_000_000


@dataclass(frozen=True, eq=False)
class Word:
    """A finite word over the letters 1, 2, ... stored read-only."""

    letters: np.ndarray
    clamped: int = 0

    def __post_init__(self) -> None:
        arr = np.array(self.letters, dtype=np.int64).reshape(-1)
        if arr.size and arr.min() < 1:
            raise DomainError("every letter must be >= 1")
        arr.setflags(write=False)
        object.__setattr__(self, "letters", arr)

    @classmethod
    def of(cls, letters: Iterable[int]) -> "Word":
        return cls(np.fromiter(letters, dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.letters.size)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self.clamped == other.clamped and np.array_equal(self.letters, other.letters)

    def __hash__(self) -> int:
        return hash((self.letters.tobytes(), self.clamped))


@dataclass(frozen=True)
class PairStats:
    """Adjacent-pair statistics of one word."""

    distinct_pairs: FrozenSet[Pair]
    x1: int
    x2: int
    x3: int
    occurrence_counts: Dict[Pair, int] = field(default_factory=dict)


def sample_word(
    params: GeomParams,
    n: int,
    rng: np.random.Generator,
    max_letter: Optional[int] = None,
) -> Word:
    """
    Draw n i.i.d. geometric letters by inverse-CDF sampling.

    Args:
        params: Letter distribution
        n: Word length
        rng: Seeded numpy generator owned by the caller
        max_letter: Clamp value; letters above it are counted in Word.clamped

    Returns:
        Word of exactly n letters
    """
    if n < 0:
        raise DomainError(f"word length must be >= 0, got {n}")
    if max_letter is None:
        max_letter = get_settings().simulation.max_letter

    # 1 - U lies in (0, 1], so log never sees 0
    u = 1.0 - rng.random(n)
    raw = 1.0 + np.floor(np.log(u) / np.log(params.q))
    over = raw > max_letter
    clamped = int(np.count_nonzero(over))
    if clamped:
        logger.warning(f"{clamped} letter(s) above {max_letter} clamped")
        raw[over] = max_letter
    return Word(raw.astype(np.int64), clamped=clamped)


def _pack(first: np.ndarray, second: np.ndarray, base: int) -> np.ndarray:
    return first * base + second


def pair_stats(word: Union[Word, Iterable[int]]) -> PairStats:
    """
    Scan adjacent positions and collect distinct pairs with multiplicities.

    Args:
        word: Word or plain letter sequence

    Returns:
        PairStats with x1, x2, x3 and the occurrence map
    """
    if not isinstance(word, Word):
        word = Word.of(word)
    letters = word.letters
    if letters.size < 2:
        return PairStats(frozenset(), 0, 0, 0, {})

    first, second = letters[:-1], letters[1:]
    base = int(letters.max()) + 1
    if base < _PACK_LIMIT:
        keys, counts = np.unique(_pack(first, second, base), return_counts=True)
        pairs = [(int(k // base), int(k % base)) for k in keys]
    else:
        rows, counts = np.unique(np.stack([first, second], axis=1), axis=0, return_counts=True)
        pairs = [(int(a), int(b)) for a, b in rows]

    occurrence = {pair: int(c) for pair, c in zip(pairs, counts)}
    x2 = len(pairs)
    x1 = sum(1 for a, b in pairs if a == b)
    return PairStats(frozenset(pairs), x1, x2, x2 - x1, occurrence)


def distinct_counts(letters: np.ndarray) -> Tuple[int, int]:
    """
    Fast (x1, x2) for a clamped letter array.

    Pairs are packed into one int64 key; letters must stay below 2^31.
    """
    if letters.size < 2:
        return 0, 0
    base = int(letters.max()) + 1
    keys = np.unique(_pack(letters[:-1], letters[1:], base))
    x1 = int(np.count_nonzero(keys // base == keys % base))
    return x1, int(keys.size)


def count_pair(letters: np.ndarray, pair: Pair) -> int:
    """Number of positions k with (letters[k], letters[k+1]) == pair."""
    if letters.size < 2:
        return 0
    return int(np.count_nonzero((letters[:-1] == pair[0]) & (letters[1:] == pair[1])))
