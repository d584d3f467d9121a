"""Cross-validation, w-sweep, and timing bench over a fingerprint index.

The fold machinery scores every validation trace against the training
bins only. For whole-grid distances the normalization maxima are rebuilt
per fold from the training rows plus the query row, so no information
leaks from other validation traces.
"""

import logging
import math
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import baseline
from .corpus import CorpusIndex
from .distance import MultiSpecDistance, SingleSpecDistance
from .entropy import EntropySpec, fingerprint
from .errors import InvalidConfig, RawTracesUnavailable, TooFewTraces
from .grid import fingerprint_vector
from .trace_model import CharType, SymbolTable, Trace, encode

__all__ = [
    "TimingTable",
    "TopXRow",
    "TopXTable",
    "crossval",
    "kfold_partition",
    "rank_of_true_class",
    "single_spec_top1_sweep",
    "t_quantile_975",
    "timing_bench",
    "w_sweep",
]

logger = logging.getLogger(__name__)

# Two-sided 95% quantile of Student's t for 9 degrees of freedom, the
# constant behind the usual 10-fold confidence intervals.
_T_DF9 = 2.262157163


def t_quantile_975(df: int) -> float:
    if df < 1:
        raise InvalidConfig(f"degrees of freedom must be >= 1, got {df}")
    if df == 9:
        return _T_DF9
    from scipy.stats import t as student_t

    return float(student_t.ppf(0.975, df))


@dataclass(frozen=True)
class TopXRow:
    x: int
    fraction: float
    ci_half_width: float

    def __post_init__(self):
        if self.x < 1:
            raise ValueError("X starts at 1")
        if self.ci_half_width < 0:
            raise ValueError("CI half-width must be >= 0")


@dataclass(frozen=True)
class TopXTable:
    """Fraction of validation traces whose true class ranked within X."""

    rows: tuple[TopXRow, ...]
    folds: int
    config: str
    events: tuple[str, ...] = ()

    def fraction_at(self, x: int) -> float:
        """Top-X average; X beyond the class count clamps to the last row."""
        return self.rows[min(x, len(self.rows)) - 1].fraction


def kfold_partition(trace_ids, k: int, seed: int) -> list[list[str]]:
    """Split ids into k seeded bins whose sizes differ by at most one."""
    if k < 2:
        raise InvalidConfig(f"need at least 2 folds, got {k}")
    ids = sorted(trace_ids)
    if len(ids) < k:
        raise TooFewTraces(f"cannot split {len(ids)} traces into {k} folds")
    random.Random(seed).shuffle(ids)
    return [ids[i::k] for i in range(k)]


def rank_of_true_class(
    labeled: list[tuple[str, str, float]], true_class: str
) -> int | None:
    """Rank of true_class among per-class minimum distances.

    Ties share the last position of their block, so the rank equals the
    number of classes at least as close as the true one. None when the
    class has no trace in the candidate set.
    """
    best: dict[str, float] = {}
    for _, class_id, dist in labeled:
        cur = best.get(class_id)
        if cur is None or dist < cur:
            best[class_id] = dist
    mine = best.get(true_class)
    if mine is None:
        return None
    return sum(1 for v in best.values() if v <= mine)


def _class_blocks(classes: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row order grouping equal classes plus block starts for reduceat."""
    order = np.argsort(classes, kind="stable")
    sorted_classes = classes[order]
    uniq, starts = np.unique(sorted_classes, return_index=True)
    return order, uniq, starts


def _fold_ranks(
    train_mat: np.ndarray,
    train_classes: np.ndarray,
    val_mat: np.ndarray,
    val_classes: np.ndarray,
    val_ids: list[str],
    config: SingleSpecDistance | MultiSpecDistance,
    col: int | None,
    fold: int,
) -> tuple[np.ndarray, list[str]]:
    """Rank of each validation trace's class; 0 marks unclassified."""
    order, uniq, starts = _class_blocks(train_classes)
    mat = train_mat[order]
    finite_cols = np.isfinite(mat).all(axis=0)
    train_max = np.zeros(mat.shape[1])
    train_max[finite_cols] = mat[:, finite_cols].max(axis=0)
    ranks = np.zeros(len(val_ids), dtype=np.int64)
    events: list[str] = []
    for i, tid in enumerate(val_ids):
        true_class = val_classes[i]
        pos = int(np.searchsorted(uniq, true_class))
        if pos >= len(uniq) or uniq[pos] != true_class:
            events.append(f"fold {fold}: class {true_class} absent from training, {tid} unclassified")
            continue
        q = val_mat[i]
        if isinstance(config, SingleSpecDistance):
            if not math.isfinite(q[col]):
                events.append(f"fold {fold}: non-finite fingerprint, {tid} unclassified")
                continue
            d = np.abs(mat[:, col] - q[col])
        else:
            norms = np.maximum(train_max, q)
            usable = finite_cols & np.isfinite(q) & (norms > 0)
            diffs = np.abs(mat[:, usable] - q[usable]) / norms[usable]
            d = (diffs**config.w).sum(axis=1) ** (1.0 / config.w)
        class_min = np.minimum.reduceat(d, starts)
        ranks[i] = int((class_min <= class_min[pos]).sum())
    return ranks, events


def _describe(config: SingleSpecDistance | MultiSpecDistance, index: CorpusIndex) -> str:
    if isinstance(config, SingleSpecDistance):
        return f"spec {config.spec.label()}, k-NN over {len(index)} traces"
    return f"grid {index.grid.name} ({len(index.grid.specs)} specs), w={config.w:g}"


def crossval(
    index: CorpusIndex,
    config: SingleSpecDistance | MultiSpecDistance,
    k: int = 10,
    seed: int = 0,
    threads: int = 1,
) -> TopXTable:
    """k-fold cross-validation of classification power under one distance.

    Every trace is scored once, against the bins it is not in. Per-fold
    Top-X fractions are averaged and the spread across folds gives the
    95% confidence half-width t(0.975, k-1)/sqrt(k) * stddev.
    """
    bins = kfold_partition(index.trace_ids, k, seed)
    matrix = index.value_matrix()
    ids = index.trace_ids
    row_of = {tid: i for i, tid in enumerate(ids)}
    classes = np.asarray(index.class_ids)
    num_classes = len(set(index.class_ids))
    col = index.grid.index_of(config.spec) if isinstance(config, SingleSpecDistance) else None

    def run_fold(f: int) -> tuple[np.ndarray, int, list[str]]:
        val_ids = bins[f]
        val_rows = np.asarray([row_of[t] for t in val_ids])
        train_rows = np.asarray([row_of[t] for g, b in enumerate(bins) if g != f for t in b])
        ranks, events = _fold_ranks(
            matrix[train_rows],
            classes[train_rows],
            matrix[val_rows],
            classes[val_rows],
            val_ids,
            config,
            col,
            f,
        )
        return ranks, len(val_ids), events

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fold_results = list(pool.map(run_fold, range(k)))
    else:
        fold_results = [run_fold(f) for f in range(k)]

    fractions = np.empty((k, num_classes))
    events: list[str] = []
    for f, (ranks, n_val, fold_events) in enumerate(fold_results):
        hits = np.bincount(ranks, minlength=num_classes + 1)[1:].cumsum()
        fractions[f] = hits / n_val
        events.extend(fold_events)
    for event in events:
        logger.warning(event)

    t_const = t_quantile_975(k - 1)
    rows = tuple(
        TopXRow(
            x + 1,
            float(fractions[:, x].mean()),
            float(t_const / math.sqrt(k) * fractions[:, x].std(ddof=1)),
        )
        for x in range(num_classes)
    )
    return TopXTable(rows, k, _describe(config, index), tuple(events))


def single_spec_top1_sweep(
    index: CorpusIndex, k: int = 10, seed: int = 0
) -> list[tuple[EntropySpec, float]]:
    """Cross-validated Top-1 fraction for every grid spec on its own.

    One pass through the fold machinery scores all specs at once, which
    is far cheaper than running crossval per spec. Specs with any
    non-finite stored value are skipped with a warning.
    """
    bins = kfold_partition(index.trace_ids, k, seed)
    matrix = index.value_matrix()
    ids = index.trace_ids
    row_of = {tid: i for i, tid in enumerate(ids)}
    classes = np.asarray(index.class_ids)
    finite_cols = np.isfinite(matrix).all(axis=0)
    for s, ok in enumerate(finite_cols):
        if not ok:
            logger.warning("skipping spec %s: non-finite fingerprints", index.grid.specs[s].label())
    cols = np.flatnonzero(finite_cols)

    top1_hits = np.zeros((len(bins), len(cols)))
    for f, val_ids in enumerate(bins):
        val_rows = np.asarray([row_of[t] for t in val_ids])
        train_rows = np.asarray([row_of[t] for g, b in enumerate(bins) if g != f for t in b])
        order, uniq, starts = _class_blocks(classes[train_rows])
        mat = matrix[train_rows][order][:, cols]
        hits = np.zeros(len(cols))
        for row, tid in zip(val_rows, val_ids):
            true_class = classes[row]
            pos = int(np.searchsorted(uniq, true_class))
            if pos >= len(uniq) or uniq[pos] != true_class:
                logger.warning(
                    "fold %d: class %s absent from training, %s unclassified", f, true_class, tid
                )
                continue
            d = np.abs(mat - matrix[row, cols])
            class_min = np.minimum.reduceat(d, starts, axis=0)
            hits += (class_min <= class_min[pos]).sum(axis=0) == 1
        top1_hits[f] = hits / len(val_ids)
    averaged = top1_hits.mean(axis=0)
    return [(index.grid.specs[c], float(averaged[j])) for j, c in enumerate(cols)]


def w_sweep(
    index: CorpusIndex,
    w_values,
    k: int = 10,
    seed: int = 0,
    threads: int = 1,
) -> list[tuple[float, TopXTable]]:
    """crossval per w over the whole grid; pairs each w with its table."""
    return [
        (float(w), crossval(index, MultiSpecDistance(w=float(w)), k, seed, threads))
        for w in w_values
    ]


@dataclass(frozen=True)
class TimingTable:
    """Median seconds to compare one reference trace against the corpus."""

    labels: tuple[str, ...]
    ref_records: dict[str, int]
    seconds: dict[tuple[str, str], float]
    reps: int

    ALGORITHMS = ("entropy_single", "entropy_full", "diff")

    def ratio(self, algorithm: str, a: str, b: str) -> float:
        return self.seconds[(algorithm, a)] / self.seconds[(algorithm, b)]


def _median_seconds(fn, reps: int) -> float:
    fn()  # warm caches and JIT outside the timed reps
    start = time.perf_counter()
    fn()
    probe = time.perf_counter() - start
    # sub-millisecond cells are averaged over an inner loop so one
    # scheduler hiccup cannot skew a rep
    inner = min(1000, max(1, math.ceil(0.001 / max(probe, 1e-9))))
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        for _ in range(inner):
            fn()
        times.append((time.perf_counter() - start) / inner)
    return float(np.median(times))


def timing_bench(
    index: CorpusIndex,
    refs: dict[str, Trace],
    spec: EntropySpec,
    reps: int = 5,
    ctype: CharType = CharType.FT,
) -> TimingTable:
    """Query cost per algorithm and reference size.

    Each timed region covers distance computation to all corpus traces
    plus the candidate ordering, starting from an already-encoded query;
    per-query preparation (fingerprinting or symbol encoding) happens
    once outside the clock so the cells isolate comparison cost.
    """
    if reps < 5:
        raise InvalidConfig(f"need at least 5 repetitions, got {reps}")
    if not index.retain_raw:
        raise RawTracesUnavailable("timing bench needs raw traces for the diff row")
    matrix = index.value_matrix()
    maxima = np.asarray(index.norms.maxima)
    col = index.grid.index_of(spec)
    column = matrix[:, col].copy()

    table = SymbolTable()
    corpus_ids = [
        np.asarray(encode(index.raw_trace(tid), ctype, table).symbols, dtype=np.int32)
        for tid in index.trace_ids
    ]

    seconds: dict[tuple[str, str], float] = {}
    records: dict[str, int] = {}
    for label, ref in refs.items():
        records[label] = len(ref.records)
        z = fingerprint(ref, spec)
        vector = np.asarray(fingerprint_vector(ref, index.grid).values)
        query_ids = np.asarray(encode(ref, ctype, table).symbols, dtype=np.int32)

        def entropy_single():
            np.argsort(np.abs(column - z))

        def entropy_full():
            norms = np.maximum(maxima, vector)
            usable = np.isfinite(matrix).all(axis=0) & np.isfinite(vector) & (norms > 0)
            diffs = np.abs(matrix[:, usable] - vector[usable]) / norms[usable]
            np.argsort(diffs.sum(axis=1))

        def diff():
            np.argsort([baseline.edit_distance_ids(query_ids, ids) for ids in corpus_ids])

        seconds[("entropy_single", label)] = _median_seconds(entropy_single, reps)
        seconds[("entropy_full", label)] = _median_seconds(entropy_full, reps)
        seconds[("diff", label)] = _median_seconds(diff, reps)

    return TimingTable(tuple(refs), records, seconds, reps)
