"""Distances between trace fingerprints.

Three forms: the absolute difference of two scalar fingerprints, the
normalized w-norm over whole fingerprint vectors, and the closed-form
small-q approximations that need only each trace's summed log
probabilities. The multi-spec distance is a pseudo-metric: zero distance
does not imply identical traces.
"""

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import GridMismatch, NonFinite
from .lexicon import Distribution
from .entropy import EntropyKind, EntropySpec

__all__ = [
    "FingerprintVector",
    "MultiSpecDistance",
    "NormMaxima",
    "SingleSpecDistance",
    "approx_distance_small_q",
    "distance_multi",
    "distance_single",
    "log_surprise_sum",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class FingerprintVector:
    """Per-trace entropy values aligned to one grid's spec order."""

    trace_id: str
    values: tuple[float, ...]
    grid_key: str

    @property
    def has_saturated(self) -> bool:
        return any(not math.isfinite(v) for v in self.values)


@dataclass(frozen=True)
class NormMaxima:
    """Per-spec maxima over a trace set, used as normalization factors."""

    maxima: tuple[float, ...]
    grid_key: str

    def __post_init__(self):
        if any(m < 0 for m in self.maxima):
            raise ValueError("normalization maxima must be >= 0")


@dataclass(frozen=True)
class SingleSpecDistance:
    """Query configuration: absolute difference on one grid component."""

    spec: EntropySpec


@dataclass(frozen=True)
class MultiSpecDistance:
    """Query configuration: normalized w-norm over the whole grid."""

    w: float = 1.0

    def __post_init__(self):
        if self.w < 1:
            raise ValueError(f"w must be >= 1, got {self.w}")


def distance_single(z_i: float, z_j: float) -> float:
    """|z_i - z_j| for two scalar fingerprints."""
    if not (math.isfinite(z_i) and math.isfinite(z_j)):
        raise NonFinite("cannot take a distance over saturated fingerprints")
    return abs(z_i - z_j)


def distance_multi(
    v_i: FingerprintVector,
    v_j: FingerprintVector,
    norms: NormMaxima,
    w: float = 1.0,
) -> float:
    """Normalized w-norm distance between two fingerprint vectors.

    ( sum_k |(v_i[k] - v_j[k]) / maxima[k]|^w )^(1/w). A component whose
    maximum over the trace set is 0 is identically 0 on every trace and
    contributes nothing (this also avoids 0/0).
    """
    if w < 1:
        raise ValueError(f"w must be >= 1, got {w}")
    if not (v_i.grid_key == v_j.grid_key == norms.grid_key):
        raise GridMismatch("vectors and maxima must come from the same grid")
    if len(v_i.values) != len(norms.maxima) or len(v_j.values) != len(norms.maxima):
        raise GridMismatch("vector length does not match grid size")
    terms = []
    for a, b, m in zip(v_i.values, v_j.values, norms.maxima):
        if m == 0.0:
            continue
        if not (math.isfinite(a) and math.isfinite(b)):
            raise NonFinite("saturated component used in distance")
        terms.append(abs((a - b) / m) ** w)
    return math.fsum(terms) ** (1.0 / w)


def log_surprise_sum(P: Distribution | Sequence[float]) -> float:
    """A = sum over dictionary entries of ln(p_k); at most 0."""
    probs = P.probs if isinstance(P, Distribution) else P
    return math.fsum(math.log(p) for p in probs)


def approx_distance_small_q(
    A_i: float, A_j: float, n: int, kind: EntropyKind, q: float
) -> float:
    """Small-q closed form of the single-spec distance for similar traces.

    Both traces are assumed to share the dictionary size n. All three
    forms are positive multiples of |A_i - A_j|, which is why they order
    any candidate set identically.
    """
    if n < 1:
        raise ValueError(f"dictionary size must be >= 1, got {n}")
    gap = abs(A_i - A_j)
    if kind is EntropyKind.LANDSBERG_VEDRAL:
        return q / (n * n) * gap
    if kind is EntropyKind.RENYI:
        return q / (_LN2 * n) * gap
    if kind is EntropyKind.TSALLIS:
        return q * gap
    raise ValueError(f"no small-q approximation for {kind}")
