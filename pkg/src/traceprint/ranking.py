"""Rank corpus classes by their distance to a query trace.

The pipeline: distance to every candidate trace, ascending sort with
trace-id tie-break, map traces to classes keeping each class's nearest
trace, then modified competition ranking. Under that tie scheme every
member of a tie block receives the block's LAST 1-based position, so a
reported rank X always means "within the X nearest classes", even in the
worst case.
"""

from dataclasses import dataclass
from typing import Iterable

from .errors import EmptyCorpus, UnsortedInput

__all__ = ["RankedClass", "modified_competition_ranks", "rank_classes", "rank_labeled_distances"]


@dataclass(frozen=True)
class RankedClass:
    class_id: str
    rank: int
    nearest_trace_id: str
    distance: float

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.distance < 0:
            raise ValueError("distance must be >= 0")


def modified_competition_ranks(sorted_items: list[tuple[str, float]]) -> list[tuple[str, int]]:
    """Assign ranks to (class_id, distance) pairs already sorted ascending.

    Items with equal distance all get the largest position of their tie
    block; the next distinct distance resumes at the following position.
    """
    for (_, a), (_, b) in zip(sorted_items, sorted_items[1:]):
        if b < a:
            raise UnsortedInput("distances must be ascending")
    ranked = []
    i = 0
    while i < len(sorted_items):
        j = i
        while j + 1 < len(sorted_items) and sorted_items[j + 1][1] == sorted_items[i][1]:
            j += 1
        block_rank = j + 1
        for k in range(i, j + 1):
            ranked.append((sorted_items[k][0], block_rank))
        i = j + 1
    return ranked


def rank_labeled_distances(
    labeled: Iterable[tuple[str, str, float]], X: int | None = None
) -> list[RankedClass]:
    """Core ranking over precomputed (trace_id, class_id, distance) rows.

    Shared by the fingerprint path, the edit-distance baseline, and the
    evaluation harness. Returns all classes when X is None, otherwise
    those with rank <= X.
    """
    rows = sorted(labeled, key=lambda r: (r[2], r[0]))
    if not rows:
        raise EmptyCorpus("no candidate traces to rank")
    nearest: list[tuple[str, float, str]] = []
    seen: set[str] = set()
    for trace_id, class_id, dist in rows:
        if class_id not in seen:
            seen.add(class_id)
            nearest.append((class_id, dist, trace_id))
    ranks = modified_competition_ranks([(c, d) for c, d, _ in nearest])
    result = [
        RankedClass(class_id, rank, trace_id, dist)
        for (class_id, dist, trace_id), (_, rank) in zip(nearest, ranks)
    ]
    if X is not None:
        result = [r for r in result if r.rank <= X]
    return result


def rank_classes(query, index, config, X: int | None = None, policy=None) -> list[RankedClass]:
    """Rank the classes of an index by distance to a query trace.

    config selects the distance: a SingleSpecDistance uses one grid
    component, a MultiSpecDistance the normalized w-norm over the whole
    grid. Returns classes with rank <= X (all classes if X is None).
    Thin wrapper over the corpus scorer plus rank_labeled_distances so
    every caller ranks identically.
    """
    from .corpus import score_query  # local import, corpus builds on ranking

    labeled = score_query(query, index, config, policy=policy)
    return rank_labeled_distances(labeled, X)
