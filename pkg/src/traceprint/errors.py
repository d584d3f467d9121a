"""Exception types shared across the package.

Every error raised by the library derives from TraceprintError so callers
(and the CLI) can catch one base class. Class names double as the error
names printed by the command line front end.
"""


class TraceprintError(Exception):
    """Base class for all errors raised by this package."""


class MalformedLine(TraceprintError):
    """A trace line could not be parsed into (function, entry/exit)."""


class UnbalancedExit(TraceprintError):
    """Strict parsing found an exit that does not match the call stack."""


class EmptyTrace(TraceprintError):
    """Trace text contained no records after blank lines were stripped."""


class TraceTooShort(TraceprintError):
    """Trace has fewer records than the requested word length needs."""


class InvalidConfig(TraceprintError):
    """A configuration value is out of its documented range."""


class NonFinite(TraceprintError):
    """A distance was requested over a saturated (infinite) component."""


class GridMismatch(TraceprintError):
    """Fingerprint vectors or maxima built against different grids."""


class UnsortedInput(TraceprintError):
    """Ranking input was expected in ascending distance order."""


class EmptyCorpus(TraceprintError):
    """Operation needs at least one indexed trace."""


class DuplicateTraceId(TraceprintError):
    """A trace id is already present in the index."""


class FormatVersionMismatch(TraceprintError):
    """Index file magic or format version is not supported."""


class CorruptIndex(TraceprintError):
    """Index file failed an internal consistency check."""


class RawTracesUnavailable(TraceprintError):
    """Operation needs raw records but the index did not retain them."""


class TooFewTraces(TraceprintError):
    """Not enough traces for the requested fold count."""


class UsageError(TraceprintError):
    """Bad command line arguments (exit code 2)."""
