"""Shannon and extended word entropies of an l-word distribution.

All values are in bits (log base 2). The three extended measures share the
power sum Q(P;q) = sum p_i^q:

    Landsberg-Vedral  (1 - 1/Q) / (1 - q)
    Renyi             log2(Q) / (1 - q)
    Tsallis           (Q - 1) / (1 - q)

Q is evaluated in log space (log-sum-exp over q*ln p_i): at large q the
naive p**q terms underflow to zero long before the true power sum does.
The one place float range still runs out is 1/Q for Landsberg-Vedral at
large q over huge dictionaries; that saturates to +inf instead of raising.

All three extended entropies reduce to Shannon at q=1. The Renyi limit is
Shannon in bits; the Landsberg-Vedral and Tsallis limits are Shannon in
nats. At q=1 we return Shannon in bits for all of them and treat the ln 2
factor on the latter two as a scale convention; it is a monotone rescale
of a single grid point and cannot affect any ranking.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InvalidConfig
from .lexicon import Distribution, distribution
from .trace_model import CharType, Trace

__all__ = [
    "EntropyKind",
    "EntropySpec",
    "Q_ONE_WINDOW",
    "batch_log_q_moments",
    "extended",
    "fingerprint",
    "q_moment",
    "shannon",
    "spec_value",
]

_LN2 = math.log(2.0)

# Width of the q=1 dispatch window. Queries at q = 1 +/- 1e-9 must already
# resolve to the Shannon limit (the raw Landsberg-Vedral and Tsallis
# formulas converge to Shannon in nats, not bits, so near-1 values cannot
# be left to the formulas). The grid's nearest non-unit q values are 1e-1
# and 1e1, far outside the window.
Q_ONE_WINDOW = 1e-8


class EntropyKind(Enum):
    SHANNON = "S"
    LANDSBERG_VEDRAL = "L"
    RENYI = "R"
    TSALLIS = "T"


_KIND_ORDER = {kind: i for i, kind in enumerate(EntropyKind)}
_CTYPE_ORDER = {ctype: i for i, ctype in enumerate(CharType)}


@dataclass(frozen=True)
class EntropySpec:
    """One fingerprint recipe: entropy kind, index q, word length, encoding.

    The log base is fixed at 2. For the Shannon kind q is forced to 1.
    """

    kind: EntropyKind
    q: float
    l: int
    ctype: CharType

    def __post_init__(self):
        if self.kind is EntropyKind.SHANNON:
            object.__setattr__(self, "q", 1.0)
        else:
            object.__setattr__(self, "q", float(self.q))
        if self.q < 0:
            raise InvalidConfig(f"q must be >= 0, got {self.q}")
        if self.l < 1:
            raise InvalidConfig(f"word length must be >= 1, got {self.l}")

    def sort_key(self) -> tuple:
        return (_KIND_ORDER[self.kind], self.q, self.l, _CTYPE_ORDER[self.ctype])

    def label(self) -> str:
        return f"{self.kind.value},{self.q:g},{self.l},{self.ctype.value}"

    @classmethod
    def parse(cls, text: str) -> "EntropySpec":
        """Parse 'E,q,l,c' as printed by label(), e.g. 'L,1e-05,3,FTD'."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise InvalidConfig(f"spec must be E,q,l,c: {text!r}")
        try:
            kind = EntropyKind(parts[0].upper())
            q = float(parts[1])
            l = int(parts[2])
            ctype = CharType(parts[3].upper())
        except ValueError as exc:
            raise InvalidConfig(f"bad spec {text!r}: {exc}") from None
        return cls(kind, q, l, ctype)


def _probs(P: Distribution | Sequence[float]) -> Sequence[float]:
    return P.probs if isinstance(P, Distribution) else P


def _log_q_moment(log_probs: Sequence[float], q: float) -> float:
    """log of sum exp(q * ln p_i), by the shifted expm1 form of log-sum-exp."""
    xs = [q * lp for lp in log_probs]
    m = max(xs)
    rest = math.fsum(math.expm1(x - m) for x in xs)
    return m + math.log1p(rest + (len(xs) - 1))


def q_moment(P: Distribution | Sequence[float], q: float) -> float:
    """Power sum Q(P;q) = sum p_i^q, in (0, n]."""
    if q < 0:
        raise InvalidConfig(f"q must be >= 0, got {q}")
    probs = _probs(P)
    return math.exp(_log_q_moment([math.log(p) for p in probs], q))


def shannon(P: Distribution | Sequence[float]) -> float:
    """Shannon entropy in bits: -sum p_i log2 p_i."""
    probs = _probs(P)
    return -math.fsum(p * math.log2(p) for p in probs)


def _from_log_moment(log_q, q, kind: EntropyKind):
    """Extended entropy from log(Q). Elementwise; scalars or arrays.

    Overflow of 1/Q (Landsberg-Vedral at large q) saturates to +inf.
    """
    with np.errstate(over="ignore"):
        if kind is EntropyKind.LANDSBERG_VEDRAL:
            return (1.0 - np.exp(-np.asarray(log_q, dtype=float))) / (1.0 - q)
        if kind is EntropyKind.RENYI:
            return np.asarray(log_q, dtype=float) / _LN2 / (1.0 - q)
        if kind is EntropyKind.TSALLIS:
            return np.expm1(np.asarray(log_q, dtype=float)) / (1.0 - q)
    raise InvalidConfig(f"not an extended entropy kind: {kind}")


def extended(P: Distribution | Sequence[float], kind: EntropyKind, q: float) -> float:
    """Landsberg-Vedral, Renyi or Tsallis entropy of P at index q, in bits.

    Within Q_ONE_WINDOW of q=1, returns shannon(P) (the q->1 limit, bits
    convention per the module docstring).
    """
    if kind is EntropyKind.SHANNON:
        raise InvalidConfig("use shannon() for the Shannon entropy")
    if q < 0:
        raise InvalidConfig(f"q must be >= 0, got {q}")
    probs = _probs(P)
    if abs(q - 1.0) <= Q_ONE_WINDOW:
        return shannon(probs)
    log_q = _log_q_moment([math.log(p) for p in probs], q)
    return float(_from_log_moment(log_q, q, kind))


def spec_value(P: Distribution | Sequence[float], spec: EntropySpec) -> float:
    """Entropy of P under one spec (kind and q; l and c already applied)."""
    if spec.kind is EntropyKind.SHANNON:
        return shannon(P)
    return extended(P, spec.kind, spec.q)


def fingerprint(trace: Trace, spec: EntropySpec) -> float:
    """Fingerprint of a trace: entropy of its l-word distribution under spec."""
    return spec_value(distribution(trace, spec.l, spec.ctype), spec)


def batch_log_q_moments(log_probs: np.ndarray, qs: np.ndarray) -> np.ndarray:
    """log(Q(P;q)) for many q at once; same log-sum-exp as the scalar path."""
    x = np.outer(qs, log_probs)
    m = x.max(axis=1)
    rest = np.expm1(x - m[:, None]).sum(axis=1)
    return m + np.log1p(rest + (log_probs.size - 1))
