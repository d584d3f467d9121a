"""Edit-distance baseline over encoded traces.

Distance is the insert/delete shortest-edit-script length (a substitution
counts as one insert plus one delete), computed by the greedy
furthest-reaching diagonal method, distance only, linear space. The
implementation is the O(NP) refinement (P = number of non-forced edit
pairs), which degrades to the classic O(ND) bound in the worst case but
is dramatically cheaper when two traces differ mostly in length. The hot
loop is JIT-compiled when numba is available; the pure-Python twin is the
same function object, so both routes share one definition.
"""

from dataclasses import dataclass

import numpy as np

from .corpus import CorpusIndex, PrefilterPolicy, prefilter
from .ranking import RankedClass, rank_labeled_distances
from .trace_model import CharType, SymbolSequence, SymbolTable, Trace, encode

__all__ = ["EditDistanceResult", "baseline_distances", "baseline_rank", "myers_edit_distance"]


@dataclass(frozen=True)
class EditDistanceResult:
    distance: int
    combined_length: int

    def __post_init__(self):
        if not (0 <= self.distance <= self.combined_length):
            raise ValueError("distance must lie in [0, combined length]")


def _greedy_diagonal_distance(a, b):  # pragma: no cover - exercised via wrappers
    """Insert/delete distance between int arrays a, b with len(a) <= len(b).

    fp[k] holds the furthest reachable position in b on diagonal
    k = (position in b) - (position in a). Each round p allows one more
    paired insert+delete beyond the len(b) - len(a) forced inserts;
    snakes extend along matches for free. Distance = delta + 2p.
    """
    m = len(a)
    n = len(b)
    delta = n - m
    offset = m + 1
    fp = np.full(m + n + 3, -1, dtype=np.int64)
    p = -1
    while True:
        p += 1
        for k in range(-p, delta):
            t = fp[k - 1 + offset] + 1
            u = fp[k + 1 + offset]
            y = t if t > u else u
            x = y - k
            while x < m and y < n and a[x] == b[y]:
                x += 1
                y += 1
            fp[k + offset] = y
        for k in range(delta + p, delta - 1, -1):
            t = fp[k - 1 + offset] + 1
            u = fp[k + 1 + offset]
            y = t if t > u else u
            x = y - k
            while x < m and y < n and a[x] == b[y]:
                x += 1
                y += 1
            fp[k + offset] = y
        if fp[delta + offset] >= n:
            return delta + 2 * p


try:  # JIT when available; identical semantics either way
    from numba import njit

    _kernel = njit(cache=True, nogil=True)(_greedy_diagonal_distance)
except ImportError:  # pragma: no cover
    _kernel = _greedy_diagonal_distance


def edit_distance_ids(a: np.ndarray, b: np.ndarray) -> int:
    """Distance between two already-encoded int sequences."""
    if len(a) > len(b):
        a, b = b, a
    return int(_kernel(a, b))


def myers_edit_distance(a: SymbolSequence, b: SymbolSequence) -> EditDistanceResult:
    """Insert/delete edit distance between two symbol sequences.

    The sequences must share one symbol table, otherwise equal-looking
    symbols would have unequal ids.
    """
    if a.table is not b.table:
        raise ValueError("sequences must share a symbol table")
    dist = edit_distance_ids(
        np.asarray(a.symbols, dtype=np.int32), np.asarray(b.symbols, dtype=np.int32)
    )
    return EditDistanceResult(dist, len(a) + len(b))


def _encode_entries(index: CorpusIndex, ctype: CharType, table: SymbolTable):
    encoded = []
    for tid, entry in index.entries.items():
        seq = encode(index.raw_trace(tid), ctype, table)
        encoded.append((tid, entry.class_id, np.asarray(seq.symbols, dtype=np.int32)))
    return encoded


def baseline_distances(
    query: Trace,
    index: CorpusIndex,
    ctype: CharType = CharType.FT,
    policy: PrefilterPolicy | None = None,
) -> list[tuple[str, str, float]]:
    """Edit distance from the query to every candidate's raw trace."""
    table = SymbolTable()
    query_ids = np.asarray(encode(query, ctype, table).symbols, dtype=np.int32)
    candidates = prefilter(query, index, policy or PrefilterPolicy.OFF)
    return [
        (tid, class_id, float(edit_distance_ids(query_ids, ids)))
        for tid, class_id, ids in _encode_entries(index, ctype, table)
        if tid in candidates
    ]


def baseline_rank(
    query: Trace,
    index: CorpusIndex,
    ctype: CharType = CharType.FT,
    X: int | None = None,
    policy: PrefilterPolicy | None = None,
) -> list[RankedClass]:
    """Rank classes by edit distance; same pipeline as the fingerprint path."""
    return rank_labeled_distances(baseline_distances(query, index, ctype, policy), X)
