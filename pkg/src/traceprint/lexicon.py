"""Overlapping l-words and their empirical probability distribution.

An l-word is a window of l consecutive symbols. A sequence of N symbols
has N - l + 1 overlapping windows; counting them and dividing by that
total gives the empirical distribution the entropy measures consume.
Only observed words are stored.
"""

import csv
from collections import Counter
from dataclasses import dataclass, field
from typing import TextIO

from .errors import TraceTooShort
from .trace_model import CharType, SymbolSequence, SymbolTable, Trace, encode

__all__ = ["Distribution", "distribution", "distribution_from_sequence", "extract_lwords", "write_distribution_csv"]


def extract_lwords(seq: SymbolSequence, l: int) -> list[tuple[int, ...]]:
    """Return the N - l + 1 overlapping windows of seq, in order."""
    if l < 1:
        raise TraceTooShort(f"word length must be >= 1, got {l}")
    symbols = seq.symbols
    if len(symbols) < l:
        raise TraceTooShort(f"sequence of {len(symbols)} symbols has no words of length {l}")
    return [symbols[i : i + l] for i in range(len(symbols) - l + 1)]


@dataclass(frozen=True)
class Distribution:
    """Empirical l-word distribution of one symbol sequence.

    Words are kept in lexicographic symbol-id order so serialization is
    reproducible. counts/total keep the probabilities exactly available
    as rationals; probs holds the float quotients.
    """

    words: tuple[tuple[int, ...], ...]
    counts: tuple[int, ...]
    probs: tuple[float, ...]
    total: int
    l: int
    ctype: CharType
    table: SymbolTable = field(repr=False)

    def __post_init__(self):
        if not (len(self.words) == len(self.counts) == len(self.probs)):
            raise ValueError("words, counts and probs must align")
        if sum(self.counts) != self.total:
            raise ValueError("counts must sum to total")
        if any(c <= 0 for c in self.counts):
            raise ValueError("only observed words may be stored")

    @property
    def n(self) -> int:
        """Dictionary size: number of distinct observed words."""
        return len(self.words)

    def word_string(self, word: tuple[int, ...]) -> str:
        return "-".join(self.table.string(s) for s in word)

    def as_dict(self) -> dict[str, float]:
        """Rendered word -> probability, mainly for tests and debugging."""
        return {self.word_string(w): p for w, p in zip(self.words, self.probs)}


def distribution_from_sequence(seq: SymbolSequence, l: int) -> Distribution:
    counter = Counter(extract_lwords(seq, l))
    words = tuple(sorted(counter))
    counts = tuple(counter[w] for w in words)
    total = len(seq) - l + 1
    probs = tuple(c / total for c in counts)
    return Distribution(words, counts, probs, total, l, seq.ctype, seq.table)


def distribution(trace: Trace, l: int, ctype: CharType) -> Distribution:
    """Empirical distribution of the trace's l-words under ctype."""
    return distribution_from_sequence(encode(trace, ctype), l)


def write_distribution_csv(dist: Distribution, out: TextIO) -> None:
    """Dump a distribution as 'word,probability' rows in stored order."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["word", "probability"])
    for word, prob in zip(dist.words, dist.probs):
        writer.writerow([dist.word_string(word), repr(prob)])
