"""Execution trace parsing, the record model, and symbol encoding.

A trace is a sequence of function entry/exit records. Each record carries
the function name, whether it enters or leaves the function, and the call
depth at that point. Traces can be projected onto symbol sequences at three
levels of detail: function name only (F), name plus entry/exit (FT), and
name plus entry/exit plus depth (FTD).
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import EmptyTrace, MalformedLine, TraceTooShort, UnbalancedExit

__all__ = [
    "CharType",
    "ParseMode",
    "RecordKind",
    "SymbolSequence",
    "SymbolTable",
    "Trace",
    "TraceRecord",
    "encode",
    "load_trace_file",
    "parse_trace",
    "render",
]


class RecordKind(Enum):
    ENTRY = "entry"
    EXIT = "exit"


class CharType(Enum):
    """How much of a record becomes part of its symbol.

    F   function name only
    FT  function name and entry/exit
    FTD function name, entry/exit, and call depth
    """

    F = "F"
    FT = "FT"
    FTD = "FTD"


class ParseMode(Enum):
    STRICT = "strict"
    LENIENT = "lenient"


@dataclass(frozen=True)
class TraceRecord:
    function: str
    kind: RecordKind
    depth: int

    def __post_init__(self):
        if not self.function or any(ch.isspace() for ch in self.function):
            raise MalformedLine(f"bad function name: {self.function!r}")
        if self.depth < 1:
            raise MalformedLine(f"depth must be >= 1, got {self.depth}")

    def symbol(self, ctype: CharType) -> str:
        if ctype is CharType.F:
            return self.function
        if ctype is CharType.FT:
            return f"{self.function}-{self.kind.value}"
        return f"{self.function}-{self.kind.value}-depth{self.depth}"


@dataclass(frozen=True)
class Trace:
    id: str
    records: tuple[TraceRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def function_names(self) -> frozenset[str]:
        return frozenset(r.function for r in self.records)


class SymbolTable:
    """Interner mapping symbol strings to dense integer ids.

    Ids are assigned in first-appearance order, so encoding the same trace
    always yields the same ids. A table may be shared between traces when
    sequences must live in one alphabet space (e.g. for edit distance).
    """

    def __init__(self):
        self._ids: dict[str, int] = {}
        self._strings: list[str] = []

    def __len__(self) -> int:
        return len(self._strings)

    def intern(self, symbol: str) -> int:
        sid = self._ids.get(symbol)
        if sid is None:
            sid = len(self._strings)
            self._ids[symbol] = sid
            self._strings.append(symbol)
        return sid

    def string(self, sid: int) -> str:
        return self._strings[sid]


@dataclass(frozen=True)
class SymbolSequence:
    """A trace projected to integer symbols under one CharType."""

    symbols: tuple[int, ...]
    table: SymbolTable = field(repr=False)
    ctype: CharType

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def alphabet_size(self) -> int:
        """Number of distinct symbols in this sequence."""
        return len(set(self.symbols))

    def symbol_strings(self) -> list[str]:
        return [self.table.string(s) for s in self.symbols]


_KINDS = {"entry": RecordKind.ENTRY, "exit": RecordKind.EXIT}


def _line_tokens(line: str) -> list[str]:
    # Leading line numbers and pipe decoration are layout, not content.
    tokens = line.split()
    start = 0
    while start < len(tokens) and (
        tokens[start].isdigit() or set(tokens[start]) <= {"|"}
    ):
        start += 1
    return tokens[start:]


def parse_trace(text: str, mode: ParseMode = ParseMode.STRICT, trace_id: str = "trace") -> Trace:
    """Parse trace text into a Trace with depths derived from a call stack.

    Each non-blank line must end in a function name and an entry/exit
    keyword (case-insensitive); anything before them is ignored. An entry
    is recorded one level below the current stack top and pushed. In
    strict mode an exit must match the stack top or UnbalancedExit is
    raised; in lenient mode a mismatched exit is recorded at
    max(stack size, 1) and leaves the stack untouched. A truncated trace
    (entries still open at the end) is legal in both modes.
    """
    records: list[TraceRecord] = []
    stack: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        tokens = _line_tokens(raw)
        if len(tokens) < 2:
            raise MalformedLine(f"line {lineno}: need function and entry/exit: {raw!r}")
        function, kind_token = tokens[-2], tokens[-1].lower()
        kind = _KINDS.get(kind_token)
        if kind is None:
            raise MalformedLine(f"line {lineno}: unknown record kind {tokens[-1]!r}")
        if kind is RecordKind.ENTRY:
            depth = len(stack) + 1
            stack.append(function)
        elif stack and stack[-1] == function:
            depth = len(stack)
            stack.pop()
        elif mode is ParseMode.STRICT:
            raise UnbalancedExit(f"line {lineno}: exit from {function!r} does not match stack")
        else:
            depth = max(len(stack), 1)
        records.append(TraceRecord(function, kind, depth))
    if not records:
        raise EmptyTrace("trace text has no records")
    return Trace(trace_id, tuple(records))


def load_trace_file(path: str | Path, mode: ParseMode = ParseMode.STRICT) -> Trace:
    """Parse a trace file; the trace id is the file name without suffix."""
    path = Path(path)
    return parse_trace(path.read_text(), mode, trace_id=path.stem)


def encode(trace: Trace, ctype: CharType, table: SymbolTable | None = None) -> SymbolSequence:
    """Project a trace to a symbol sequence under the given CharType.

    Pass a shared table to put several traces into one alphabet space.
    """
    if not trace.records:
        raise TraceTooShort("cannot encode an empty trace")
    if table is None:
        table = SymbolTable()
    symbols = tuple(table.intern(r.symbol(ctype)) for r in trace.records)
    return SymbolSequence(symbols, table, ctype)


def render(trace: Trace) -> str:
    """Write a trace in canonical form: one 'function entry|exit' per line."""
    return "".join(f"{r.function} {r.kind.value}\n" for r in trace.records)
