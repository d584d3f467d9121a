import random

import numpy as np
import pytest

from oracles import dp_edit_distance
from traceprint import (
    CharType,
    CorpusIndex,
    EditDistanceResult,
    GridConfig,
    ParseMode,
    PrefilterPolicy,
    RawTracesUnavailable,
    SymbolSequence,
    SymbolTable,
    baseline_distances,
    baseline_rank,
    build_grid,
    ingest,
    myers_edit_distance,
    parse_trace,
)
from traceprint.baseline import _greedy_diagonal_distance, edit_distance_ids

TEXT_A = "1 f1 entry\n2 f2 entry\n3 f2 exit\n4 f1 exit\n"
TEXT_B = "1 f3 entry\n2 f3 exit\n3 f3 entry\n4 f3 exit\n"
TEXT_C = "1 f1 entry\n2 f3 entry\n3 f3 exit\n4 f1 exit\n"

GRID = build_grid(GridConfig(word_lengths=(1, 2), q_values=(0.0, 2.0)), name="tiny")


def seq(letters, table):
    return SymbolSequence(tuple(table.intern(ch) for ch in letters), table, CharType.F)


def test_classic_example():
    table = SymbolTable()
    a = seq("ABCABBA", table)
    b = seq("CBABAC", table)
    result = myers_edit_distance(a, b)
    assert result.distance == 5
    assert result.combined_length == 13
    # symmetric
    assert myers_edit_distance(b, a).distance == 5


def test_identical_and_disjoint():
    table = SymbolTable()
    a = seq("XYZXYZ", table)
    assert myers_edit_distance(a, a).distance == 0
    b = seq("PQ", table)
    # nothing shared: delete all of one, insert all of the other
    assert myers_edit_distance(a, b).distance == 8


def test_empty_sequences():
    empty = np.array([], dtype=np.int32)
    three = np.array([1, 2, 3], dtype=np.int32)
    assert edit_distance_ids(empty, empty) == 0
    assert edit_distance_ids(empty, three) == 3
    assert edit_distance_ids(three, empty) == 3


def test_table_mismatch_rejected():
    a = seq("AB", SymbolTable())
    b = seq("AB", SymbolTable())
    with pytest.raises(ValueError):
        myers_edit_distance(a, b)


def test_result_validation():
    with pytest.raises(ValueError):
        EditDistanceResult(-1, 4)
    with pytest.raises(ValueError):
        EditDistanceResult(5, 4)
    assert EditDistanceResult(0, 0).distance == 0


def test_matches_dp_oracle_random():
    rng = random.Random(7)
    for _ in range(200):
        sigma = rng.randrange(1, 7)
        a = [rng.randrange(sigma) for _ in range(rng.randrange(0, 81))]
        b = [rng.randrange(sigma) for _ in range(rng.randrange(0, 81))]
        expected = dp_edit_distance(a, b)
        got = edit_distance_ids(np.array(a, dtype=np.int32), np.array(b, dtype=np.int32))
        assert got == expected, (a, b)


def test_pure_python_path_matches_kernel():
    rng = random.Random(11)
    for _ in range(40):
        a = np.array([rng.randrange(4) for _ in range(rng.randrange(0, 40))], dtype=np.int64)
        b = np.array([rng.randrange(4) for _ in range(rng.randrange(0, 40))], dtype=np.int64)
        if len(a) > len(b):
            a, b = b, a
        assert _greedy_diagonal_distance(a, b) == dp_edit_distance(list(a), list(b))


def small_index(retain_raw=True):
    index = CorpusIndex(GRID, retain_raw=retain_raw)
    for text, tid, cid in ((TEXT_A, "t_a", "ca"), (TEXT_B, "t_b", "cb"), (TEXT_C, "t_c", "cc")):
        ingest(parse_trace(text, ParseMode.STRICT, trace_id=tid), cid, index)
    return index


def test_baseline_distances_self_zero():
    index = small_index()
    query = parse_trace(TEXT_A, ParseMode.STRICT, trace_id="q")
    rows = dict((t, d) for t, _, d in baseline_distances(query, index))
    assert rows["t_a"] == 0.0
    assert rows["t_b"] > 0.0
    # FT symbols: t_c shares f1-entry/f1-exit with the query
    assert rows["t_c"] == 4.0


def test_baseline_rank():
    index = small_index()
    query = parse_trace(TEXT_A, ParseMode.STRICT, trace_id="q")
    ranked = baseline_rank(query, index)
    assert ranked[0].class_id == "ca"
    assert ranked[0].rank == 1
    assert ranked[0].distance == 0.0
    top1 = baseline_rank(query, index, X=1)
    assert {r.class_id for r in top1} == {"ca"}


def test_baseline_prefilter_pass_through():
    index = small_index()
    query = parse_trace(TEXT_A, ParseMode.STRICT, trace_id="q")
    rows = baseline_distances(query, index, policy=PrefilterPolicy.SUPERSET)
    assert [t for t, _, _ in rows] == ["t_a"]


def test_baseline_requires_raw():
    index = small_index(retain_raw=False)
    query = parse_trace(TEXT_A, ParseMode.STRICT, trace_id="q")
    with pytest.raises(RawTracesUnavailable):
        baseline_distances(query, index)
