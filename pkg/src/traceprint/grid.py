"""The fingerprint grid: which (kind, q, l, c) specs a corpus computes.

The default grid crosses word lengths 1..7 and all three character types
with one Shannon spec plus Landsberg-Vedral/Renyi/Tsallis at eight q
values each. q=1 appears only as the Shannon spec (the three extended
measures all collapse to it there), and Landsberg-Vedral at q=100 is
excluded: its values explode past any useful range. That leaves
(1 + 3*8 - 1) * 7 * 3 = 504 specs.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .distance import FingerprintVector
from .entropy import EntropyKind, EntropySpec, Q_ONE_WINDOW, batch_log_q_moments, shannon, _from_log_moment
from .errors import InvalidConfig
from .lexicon import distribution_from_sequence
from .trace_model import CharType, Trace, encode

__all__ = ["Grid", "GridConfig", "build_grid", "default_grid", "fingerprint_vector", "single_spec_grid"]

DEFAULT_WORD_LENGTHS = (1, 2, 3, 4, 5, 6, 7)
DEFAULT_Q_VALUES = (0.0, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0)
DEFAULT_CTYPES = (CharType.F, CharType.FT, CharType.FTD)
DEFAULT_EXCLUSIONS = ((EntropyKind.LANDSBERG_VEDRAL, 100.0),)


@dataclass(frozen=True)
class GridConfig:
    word_lengths: tuple[int, ...] = DEFAULT_WORD_LENGTHS
    q_values: tuple[float, ...] = DEFAULT_Q_VALUES
    ctypes: tuple[CharType, ...] = DEFAULT_CTYPES
    kinds: tuple[EntropyKind, ...] = tuple(EntropyKind)
    exclusions: tuple[tuple[EntropyKind, float], ...] = DEFAULT_EXCLUSIONS

    def __post_init__(self):
        if not self.word_lengths or not self.q_values or not self.ctypes or not self.kinds:
            raise InvalidConfig("grid config sets must be non-empty")
        if any(l < 1 for l in self.word_lengths):
            raise InvalidConfig("word lengths must be >= 1")
        if any(q < 0 for q in self.q_values):
            raise InvalidConfig("q values must be >= 0")


@dataclass(frozen=True)
class Grid:
    """Ordered, duplicate-free spec list; fingerprint vectors align to it."""

    specs: tuple[EntropySpec, ...]
    name: str = "grid"
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        seen = {}
        for i, spec in enumerate(self.specs):
            ident = (spec.kind, spec.q, spec.l, spec.ctype)
            if ident in seen:
                raise InvalidConfig(f"duplicate spec {spec.label()}")
            seen[ident] = i
        self._index.update(seen)

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self):
        return iter(self.specs)

    def __getitem__(self, i: int) -> EntropySpec:
        return self.specs[i]

    def index_of(self, spec: EntropySpec) -> int:
        try:
            return self._index[(spec.kind, spec.q, spec.l, spec.ctype)]
        except KeyError:
            raise InvalidConfig(f"spec {spec.label()} is not in this grid") from None

    @property
    def max_word_length(self) -> int:
        return max(spec.l for spec in self.specs)

    def serialize(self) -> str:
        """Canonical JSON form; also the basis of the grid key."""
        rows = [[s.kind.value, s.q, s.l, s.ctype.value] for s in self.specs]
        return json.dumps({"name": self.name, "specs": rows}, separators=(",", ":"))

    @property
    def key(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()

    @classmethod
    def deserialize(cls, text: str) -> "Grid":
        doc = json.loads(text)
        specs = tuple(
            EntropySpec(EntropyKind(k), q, l, CharType(c)) for k, q, l, c in doc["specs"]
        )
        return cls(specs, name=doc.get("name", "grid"))


def build_grid(config: GridConfig | None = None, name: str = "default") -> Grid:
    """Build the spec grid for a config, default config if none given.

    Ordering is (kind, q ascending, l, c) and is bit-stable for a given
    config. Shannon gets exactly one spec per (l, c); the extended kinds
    skip q=1 (it duplicates Shannon) and any excluded (kind, q) pairs.
    """
    config = config or GridConfig()
    excluded = set(config.exclusions)
    specs = []
    for kind in EntropyKind:
        if kind not in config.kinds:
            continue
        if kind is EntropyKind.SHANNON:
            qs = [1.0]
        else:
            qs = sorted(q for q in set(config.q_values) if abs(q - 1.0) > Q_ONE_WINDOW)
        for q in qs:
            if (kind, q) in excluded:
                continue
            for l in sorted(config.word_lengths):
                for ctype in CharType:
                    if ctype in config.ctypes:
                        specs.append(EntropySpec(kind, q, l, ctype))
    return Grid(tuple(specs), name=name)


def default_grid() -> Grid:
    return build_grid()


def single_spec_grid(spec: EntropySpec) -> Grid:
    return Grid((spec,), name=f"single:{spec.label()}")


def fingerprint_vector(trace: Trace, grid: Grid) -> FingerprintVector:
    """All grid fingerprints of one trace.

    The trace is encoded once per character type and the l-word
    distribution built once per (c, l); every spec sharing that
    distribution is then just one entropy evaluation. Matches the scalar
    entropy functions to float noise (same log-space formulas, numpy
    reductions instead of fsum).
    """
    groups: dict[tuple[CharType, int], list[int]] = {}
    for i, spec in enumerate(grid.specs):
        groups.setdefault((spec.ctype, spec.l), []).append(i)

    sequences = {ctype: encode(trace, ctype) for ctype in {c for c, _ in groups}}
    values = np.empty(len(grid.specs))
    for (ctype, l), indices in groups.items():
        dist = distribution_from_sequence(sequences[ctype], l)
        probs = np.asarray(dist.probs)
        log_probs = np.log(probs)
        shannon_bits = shannon(dist.probs)
        by_kind: dict[EntropyKind, list[int]] = {}
        for i in indices:
            by_kind.setdefault(grid.specs[i].kind, []).append(i)
        for kind, idxs in by_kind.items():
            if kind is EntropyKind.SHANNON:
                values[idxs] = shannon_bits
                continue
            qs = np.array([grid.specs[i].q for i in idxs])
            near_one = np.abs(qs - 1.0) <= Q_ONE_WINDOW
            out = np.empty(len(idxs))
            out[near_one] = shannon_bits
            if not near_one.all():
                far = ~near_one
                log_q = batch_log_q_moments(log_probs, qs[far])
                out[far] = _from_log_moment(log_q, qs[far], kind)
            values[idxs] = out
    return FingerprintVector(trace.id, tuple(float(v) for v in values), grid.key)
