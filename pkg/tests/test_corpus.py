import math
import struct

import numpy as np
import pytest

from traceprint import (
    CharType,
    CorpusIndex,
    CorruptIndex,
    DuplicateTraceId,
    EmptyCorpus,
    EntropyKind,
    EntropySpec,
    FormatVersionMismatch,
    GridConfig,
    GridMismatch,
    MultiSpecDistance,
    NonFinite,
    NormMaxima,
    ParseMode,
    PrefilterPolicy,
    RawTracesUnavailable,
    SingleSpecDistance,
    build_grid,
    distance_multi,
    fingerprint,
    fingerprint_vector,
    ingest,
    load,
    parse_trace,
    prefilter,
    read_manifest_csv,
    save,
    score_query,
    single_spec_grid,
)

TEXT_A = "1 f1 entry\n2 f2 entry\n3 f2 exit\n4 f1 exit\n"
TEXT_B = "1 f3 entry\n2 f3 exit\n3 f3 entry\n4 f3 exit\n"
TEXT_C = "1 f1 entry\n2 f3 entry\n3 f3 exit\n4 f1 exit\n"

SMALL_GRID = build_grid(GridConfig(word_lengths=(1, 2), q_values=(0.0, 0.5, 2.0)), name="small")


def mk(text, tid):
    return parse_trace(text, ParseMode.STRICT, trace_id=tid)


def small_index(retain_raw=False):
    index = CorpusIndex(SMALL_GRID, retain_raw=retain_raw)
    ingest(mk(TEXT_A, "t_a"), "ca", index)
    ingest(mk(TEXT_B, "t_b"), "cb", index)
    ingest(mk(TEXT_C, "t_c"), "cc", index)
    return index


def test_ingest_and_lookup():
    index = small_index()
    assert len(index) == 3
    assert index.trace_ids == ["t_a", "t_b", "t_c"]
    assert index.class_ids == ["ca", "cb", "cc"]
    assert index.entries["t_a"].functions == frozenset({"f1", "f2"})


def test_duplicate_trace_id():
    index = small_index()
    with pytest.raises(DuplicateTraceId):
        ingest(mk(TEXT_A, "t_a"), "other", index)


def test_ingest_precomputed_vector():
    index = CorpusIndex(SMALL_GRID)
    trace = mk(TEXT_A, "t_a")
    vec = fingerprint_vector(trace, SMALL_GRID)
    ingest(trace, "ca", index, vector=vec)
    assert index.entries["t_a"].vector is vec


def test_ingest_vector_grid_mismatch():
    index = CorpusIndex(SMALL_GRID)
    trace = mk(TEXT_A, "t_a")
    other = single_spec_grid(EntropySpec(EntropyKind.SHANNON, 1.0, 1, CharType.F))
    wrong = fingerprint_vector(trace, other)
    with pytest.raises(GridMismatch):
        ingest(trace, "ca", index, vector=wrong)


def test_norm_maxima_track_ingest():
    index = small_index()
    matrix = index.value_matrix()
    assert np.array_equal(np.array(index.norms.maxima), matrix.max(axis=0))


def test_value_matrix_cache_invalidation():
    index = small_index()
    first = index.value_matrix()
    assert index.value_matrix() is first
    ingest(mk(TEXT_A, "t_d"), "ca", index)
    second = index.value_matrix()
    assert second.shape == (4, len(SMALL_GRID))


def test_prefilter_policies():
    index = small_index()
    query = mk(TEXT_A, "q")
    assert prefilter(query, index, PrefilterPolicy.OFF) == {"t_a", "t_b", "t_c"}
    assert prefilter(query, index, PrefilterPolicy.INTERSECT) == {"t_a", "t_c"}
    assert prefilter(query, index, PrefilterPolicy.SUPERSET) == {"t_a"}
    # a single-function query intersects everything that calls it
    q3 = mk(TEXT_B, "q3")
    assert prefilter(q3, index, PrefilterPolicy.INTERSECT) == {"t_b", "t_c"}
    assert prefilter(q3, index, PrefilterPolicy.SUPERSET) == {"t_b", "t_c"}


def test_score_query_single_matches_scalar_path():
    index = small_index()
    query = mk(TEXT_C, "q")
    spec = EntropySpec(EntropyKind.RENYI, 2.0, 1, CharType.FT)
    rows = score_query(query, index, SingleSpecDistance(spec))
    z_q = fingerprint(query, spec)
    expected = {
        tid: abs(fingerprint(mk(text, tid), spec) - z_q)
        for tid, text in (("t_a", TEXT_A), ("t_b", TEXT_B), ("t_c", TEXT_C))
    }
    assert {tid for tid, _, _ in rows} == set(expected)
    for tid, class_id, d in rows:
        assert d == pytest.approx(expected[tid], rel=1e-12)
    assert dict((t, c) for t, c, _ in rows) == {"t_a": "ca", "t_b": "cb", "t_c": "cc"}


def test_score_query_multi_matches_pairwise_distance():
    index = small_index()
    query = mk(TEXT_B, "q")
    config = MultiSpecDistance(w=2.0)
    rows = dict((t, d) for t, _, d in score_query(query, index, config))
    q_vec = fingerprint_vector(query, SMALL_GRID)
    shared = np.maximum(np.array(index.norms.maxima), np.array(q_vec.values))
    norms = NormMaxima(tuple(float(x) for x in shared), SMALL_GRID.key)
    for tid, text in (("t_a", TEXT_A), ("t_b", TEXT_B), ("t_c", TEXT_C)):
        expected = distance_multi(q_vec, fingerprint_vector(mk(text, tid), SMALL_GRID), norms, w=2.0)
        assert rows[tid] == pytest.approx(expected, rel=1e-12)


def test_score_query_self_distance_zero():
    index = small_index()
    rows = dict((t, d) for t, _, d in score_query(mk(TEXT_A, "q"), index, MultiSpecDistance()))
    assert rows["t_a"] == 0.0


def test_score_query_prefilter_drops_rows():
    index = small_index()
    rows = score_query(mk(TEXT_A, "q"), index, MultiSpecDistance(), policy=PrefilterPolicy.SUPERSET)
    assert [t for t, _, _ in rows] == ["t_a"]


def test_score_query_empty_corpus():
    index = CorpusIndex(SMALL_GRID)
    with pytest.raises(EmptyCorpus):
        score_query(mk(TEXT_A, "q"), index, MultiSpecDistance())


def test_score_query_single_nonfinite():
    # q=0 Landsberg-Vedral on a single-word trace: Q = 1, H_L = 0; need a
    # saturated value instead, so force one by injecting an inf fingerprint
    index = small_index()
    spec = SMALL_GRID[0]
    tid = index.trace_ids[0]
    entry = index.entries[tid]
    values = list(entry.vector.values)
    values[0] = math.inf
    entry.vector = type(entry.vector)(tid, tuple(values), SMALL_GRID.key)
    index._matrix = None
    with pytest.raises(NonFinite):
        score_query(mk(TEXT_A, "q"), index, SingleSpecDistance(spec))


def test_save_load_round_trip(tmp_path):
    index = small_index(retain_raw=True)
    index.manifest = {"t_a": "a.trace", "t_b": "b.trace", "t_c": "c.trace"}
    path = tmp_path / "corpus.idx"
    save(index, path)
    loaded = load(path)
    assert loaded.grid.key == SMALL_GRID.key
    assert loaded.trace_ids == index.trace_ids
    assert loaded.class_ids == index.class_ids
    assert loaded.manifest == index.manifest
    assert loaded.retain_raw
    assert np.array_equal(loaded.value_matrix(), index.value_matrix())
    assert loaded.norms.maxima == index.norms.maxima
    for tid in index.trace_ids:
        assert loaded.entries[tid].functions == index.entries[tid].functions
        assert loaded.entries[tid].raw == index.entries[tid].raw


def test_save_load_without_raw(tmp_path):
    index = small_index(retain_raw=False)
    path = tmp_path / "corpus.idx"
    save(index, path)
    loaded = load(path)
    assert not loaded.retain_raw
    with pytest.raises(RawTracesUnavailable):
        loaded.raw_trace("t_a")


def test_raw_trace_round_trip(tmp_path):
    index = small_index(retain_raw=True)
    trace = index.raw_trace("t_a")
    assert trace.id == "t_a"
    assert [r.function for r in trace.records] == ["f1", "f2", "f2", "f1"]


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "corpus.idx"
    save(small_index(), path)
    data = bytearray(path.read_bytes())
    data[:8] = b"NOTMAGIC"
    path.write_bytes(bytes(data))
    with pytest.raises(FormatVersionMismatch):
        load(path)


def test_load_rejects_bad_version(tmp_path):
    path = tmp_path / "corpus.idx"
    save(small_index(), path)
    data = bytearray(path.read_bytes())
    data[8:12] = struct.pack("<I", 99)
    path.write_bytes(bytes(data))
    with pytest.raises(FormatVersionMismatch):
        load(path)


def test_load_rejects_corrupt_grid(tmp_path):
    path = tmp_path / "corpus.idx"
    save(small_index(), path)
    data = bytearray(path.read_bytes())
    data[20] ^= 0xFF  # inside the grid JSON block
    path.write_bytes(bytes(data))
    with pytest.raises(CorruptIndex):
        load(path)


def test_load_rejects_truncation(tmp_path):
    path = tmp_path / "corpus.idx"
    save(small_index(), path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(CorruptIndex):
        load(path)


def test_load_rejects_tampered_maxima(tmp_path):
    path = tmp_path / "corpus.idx"
    save(small_index(), path)
    data = bytearray(path.read_bytes())
    (grid_len,) = struct.unpack_from("<I", data, 16)
    norms_off = 20 + grid_len + 32 + 8
    struct.pack_into("<d", data, norms_off, 12345.6789)
    path.write_bytes(bytes(data))
    with pytest.raises(CorruptIndex):
        load(path)


def test_read_manifest_csv(tmp_path):
    csv_path = tmp_path / "manifest.csv"
    csv_path.write_text(
        "trace_file,class_id\n\na.trace,ca\nsub/b.trace , cb \n", encoding="utf-8"
    )
    rows = read_manifest_csv(csv_path)
    assert rows == [(tmp_path / "a.trace", "ca"), (tmp_path / "sub" / "b.trace", "cb")]


def test_read_manifest_csv_headerless(tmp_path):
    csv_path = tmp_path / "manifest.csv"
    csv_path.write_text("a.trace,ca\nb.trace,cb\n", encoding="utf-8")
    assert len(read_manifest_csv(csv_path)) == 2


def test_read_manifest_csv_bad_row(tmp_path):
    csv_path = tmp_path / "manifest.csv"
    csv_path.write_text("a.trace,ca,extra\n", encoding="utf-8")
    with pytest.raises(CorruptIndex):
        read_manifest_csv(csv_path)
