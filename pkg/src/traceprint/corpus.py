"""Persistent library of labeled, fingerprinted traces.

The index keeps one fingerprint vector per trace plus the running
per-spec maxima used as normalization factors, so queries never need the
original trace text. Raw text retention is optional and exists only for
the edit-distance baseline. The on-disk format is a fixed-width block of
8-byte little-endian floats (norms, then one row per trace) framed by a
versioned header with the grid serialization and followed by a JSON
string table; the float block is flat enough to memory-map.
"""

import csv
import hashlib
import json
import math
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .distance import FingerprintVector, MultiSpecDistance, NormMaxima, SingleSpecDistance
from .entropy import fingerprint as scalar_fingerprint
from .errors import (
    CorruptIndex,
    DuplicateTraceId,
    EmptyCorpus,
    FormatVersionMismatch,
    GridMismatch,
    NonFinite,
    RawTracesUnavailable,
)
from .grid import Grid, fingerprint_vector
from .trace_model import ParseMode, Trace, parse_trace, render

__all__ = [
    "CorpusEntry",
    "CorpusIndex",
    "PrefilterPolicy",
    "ingest",
    "load",
    "prefilter",
    "read_manifest_csv",
    "save",
    "score_query",
]

_MAGIC = b"TRACEFPX"
_VERSION = 1
_FLAG_RAW = 1


class PrefilterPolicy(Enum):
    OFF = "off"
    INTERSECT = "intersect"
    SUPERSET = "superset"


@dataclass
class CorpusEntry:
    class_id: str
    vector: FingerprintVector
    functions: frozenset[str]
    raw: str | None = None


class CorpusIndex:
    """In-memory index: grid, per-trace entries, running norm maxima."""

    def __init__(self, grid: Grid, retain_raw: bool = False):
        self.grid = grid
        self.retain_raw = retain_raw
        self.entries: dict[str, CorpusEntry] = {}
        self.manifest: dict[str, str] = {}
        self._maxima = np.zeros(len(grid))
        self._matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def norms(self) -> NormMaxima:
        return NormMaxima(tuple(float(m) for m in self._maxima), self.grid.key)

    @property
    def trace_ids(self) -> list[str]:
        return list(self.entries)

    @property
    def class_ids(self) -> list[str]:
        return [e.class_id for e in self.entries.values()]

    def value_matrix(self) -> np.ndarray:
        """Entry fingerprints as a (count, |grid|) array, rows in entry order."""
        if self._matrix is None or self._matrix.shape[0] != len(self.entries):
            self._matrix = np.array(
                [e.vector.values for e in self.entries.values()]
            ).reshape(len(self.entries), len(self.grid))
        return self._matrix

    def raw_trace(self, trace_id: str) -> Trace:
        entry = self.entries[trace_id]
        if entry.raw is None:
            raise RawTracesUnavailable(f"index did not retain raw text for {trace_id!r}")
        # Lenient: retained text may describe a truncated or mutated run.
        return parse_trace(entry.raw, ParseMode.LENIENT, trace_id=trace_id)


def ingest(
    trace: Trace,
    class_id: str,
    index: CorpusIndex,
    vector: FingerprintVector | None = None,
) -> str:
    """Fingerprint a trace once and add it to the index under class_id.

    A vector precomputed elsewhere (e.g. in a worker pool) may be passed
    in; it must have been built against the index's grid.
    """
    if trace.id in index.entries:
        raise DuplicateTraceId(f"trace id {trace.id!r} already indexed")
    if vector is None:
        vector = fingerprint_vector(trace, index.grid)
    elif vector.grid_key != index.grid.key:
        raise GridMismatch("precomputed vector was built against a different grid")
    index.entries[trace.id] = CorpusEntry(
        class_id=class_id,
        vector=vector,
        functions=trace.function_names(),
        raw=render(trace) if index.retain_raw else None,
    )
    np.maximum(index._maxima, vector.values, out=index._maxima)
    index._matrix = None
    return trace.id


def prefilter(query: Trace, index: CorpusIndex, policy: PrefilterPolicy) -> set[str]:
    """Cheap candidate rejection on shared function names.

    Intersect keeps entries sharing at least one function name with the
    query; Superset keeps entries whose names contain all of the query's.
    """
    if policy is PrefilterPolicy.OFF:
        return set(index.entries)
    names = query.function_names()
    if policy is PrefilterPolicy.INTERSECT:
        return {tid for tid, e in index.entries.items() if e.functions & names}
    return {tid for tid, e in index.entries.items() if names <= e.functions}


def score_query(
    query: Trace,
    index: CorpusIndex,
    config: SingleSpecDistance | MultiSpecDistance,
    policy: PrefilterPolicy | None = None,
) -> list[tuple[str, str, float]]:
    """Distance from the query to each candidate entry.

    Returns (trace_id, class_id, distance) rows in entry order. The
    multi-spec path normalizes by max(stored maxima, the query's own
    fingerprint) per component, so a query larger than anything indexed
    still lands in [0, 1] ranges. Components that are saturated anywhere
    or have a zero maximum are excluded grid-wide.
    """
    if not index.entries:
        raise EmptyCorpus("index has no traces")
    candidates = prefilter(query, index, policy or PrefilterPolicy.OFF)
    matrix = index.value_matrix()
    if isinstance(config, SingleSpecDistance):
        col = index.grid.index_of(config.spec)
        z_query = scalar_fingerprint(query, config.spec)
        column = matrix[:, col]
        if not (math.isfinite(z_query) and np.isfinite(column).all()):
            raise NonFinite(f"saturated fingerprints under {config.spec.label()}")
        distances = np.abs(column - z_query)
    else:
        q_vector = np.asarray(fingerprint_vector(query, index.grid).values)
        norms = np.maximum(index._maxima, q_vector)
        usable = np.isfinite(matrix).all(axis=0) & np.isfinite(q_vector) & (norms > 0)
        diffs = np.abs(matrix[:, usable] - q_vector[usable]) / norms[usable]
        distances = (diffs**config.w).sum(axis=1) ** (1.0 / config.w)
    return [
        (tid, entry.class_id, float(d))
        for (tid, entry), d in zip(index.entries.items(), distances)
        if tid in candidates
    ]


def read_manifest_csv(path: str | Path) -> list[tuple[Path, str]]:
    """Read 'trace_file,class_id' rows; paths resolve against the CSV's dir.

    A first row that literally names the columns is treated as a header.
    """
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise CorruptIndex(f"manifest row must be trace_file,class_id: {row}")
            rows.append(row)
    if rows and [c.strip().lower() for c in rows[0]] == ["trace_file", "class_id"]:
        rows = rows[1:]
    return [(path.parent / f.strip(), c.strip()) for f, c in rows]


def save(index: CorpusIndex, path: str | Path) -> None:
    """Write the index in the versioned binary format."""
    grid_json = index.grid.serialize().encode()
    matrix = index.value_matrix().astype("<f8")
    meta = {
        "ids": index.trace_ids,
        "classes": index.class_ids,
        "functions": [sorted(e.functions) for e in index.entries.values()],
        "manifest": index.manifest,
        "raw": {tid: e.raw for tid, e in index.entries.items()} if index.retain_raw else None,
    }
    meta_json = json.dumps(meta, separators=(",", ":")).encode()
    with Path(path).open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, _FLAG_RAW if index.retain_raw else 0))
        fh.write(struct.pack("<I", len(grid_json)))
        fh.write(grid_json)
        fh.write(hashlib.sha256(grid_json).digest())
        fh.write(struct.pack("<II", len(index.grid), len(index.entries)))
        fh.write(index._maxima.astype("<f8").tobytes())
        fh.write(matrix.tobytes())
        fh.write(struct.pack("<Q", len(meta_json)))
        fh.write(meta_json)


def _read_exact(fh, size: int, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise CorruptIndex(f"index file truncated while reading {what}")
    return data


def load(path: str | Path) -> CorpusIndex:
    """Read an index file, verifying version, grid hash, and maxima."""
    with Path(path).open("rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise FormatVersionMismatch(f"not an index file: magic {magic!r}")
        version, flags = struct.unpack("<II", _read_exact(fh, 8, "header"))
        if version != _VERSION:
            raise FormatVersionMismatch(f"unsupported index version {version}")
        (grid_len,) = struct.unpack("<I", _read_exact(fh, 4, "header"))
        grid_json = _read_exact(fh, grid_len, "grid")
        stored_sha = _read_exact(fh, 32, "grid hash")
        if hashlib.sha256(grid_json).digest() != stored_sha:
            raise CorruptIndex("grid serialization does not match its stored hash")
        grid = Grid.deserialize(grid_json.decode())
        m, count = struct.unpack("<II", _read_exact(fh, 8, "sizes"))
        if m != len(grid):
            raise CorruptIndex(f"grid has {len(grid)} specs but header says {m}")
        maxima = np.frombuffer(_read_exact(fh, 8 * m, "norms"), dtype="<f8").copy()
        matrix = np.frombuffer(
            _read_exact(fh, 8 * m * count, "fingerprints"), dtype="<f8"
        ).reshape(count, m)
        (meta_len,) = struct.unpack("<Q", _read_exact(fh, 8, "string table size"))
        meta = json.loads(_read_exact(fh, meta_len, "string table").decode())

    recomputed = matrix.max(axis=0) if count else np.zeros(m)
    disagree = ~(
        np.isclose(recomputed, maxima, rtol=0.0, atol=1e-12)
        | (np.isinf(recomputed) & np.isinf(maxima))
    )
    if disagree.any():
        raise CorruptIndex("stored norm maxima disagree with fingerprints")

    index = CorpusIndex(grid, retain_raw=bool(flags & _FLAG_RAW))
    raw_map = meta.get("raw") or {}
    for row, (tid, class_id, functions) in enumerate(
        zip(meta["ids"], meta["classes"], meta["functions"])
    ):
        index.entries[tid] = CorpusEntry(
            class_id=class_id,
            vector=FingerprintVector(tid, tuple(matrix[row]), grid.key),
            functions=frozenset(functions),
            raw=raw_map.get(tid),
        )
    index.manifest = dict(meta["manifest"])
    index._maxima = maxima
    return index


