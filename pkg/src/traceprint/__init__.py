"""Word-entropy fingerprints for execution traces.

Traces are parsed into entry/exit records, projected to symbol strings
at a chosen granularity, and summarized by entropies of their l-word
distributions. Fingerprint vectors over a spec grid support nearest-class
ranking, persistent indexing, an edit-distance baseline, and k-fold
evaluation of classification power.
"""

from .baseline import EditDistanceResult, baseline_distances, baseline_rank, myers_edit_distance
from .corpus import (
    CorpusEntry,
    CorpusIndex,
    PrefilterPolicy,
    ingest,
    load,
    prefilter,
    read_manifest_csv,
    save,
    score_query,
)
from .distance import (
    FingerprintVector,
    MultiSpecDistance,
    NormMaxima,
    SingleSpecDistance,
    approx_distance_small_q,
    distance_multi,
    distance_single,
    log_surprise_sum,
)
from .entropy import EntropyKind, EntropySpec, extended, fingerprint, q_moment, shannon
from .errors import (
    CorruptIndex,
    DuplicateTraceId,
    EmptyCorpus,
    EmptyTrace,
    FormatVersionMismatch,
    GridMismatch,
    InvalidConfig,
    MalformedLine,
    NonFinite,
    RawTracesUnavailable,
    TooFewTraces,
    TraceprintError,
    TraceTooShort,
    UnbalancedExit,
    UnsortedInput,
    UsageError,
)
from .evaluation import (
    TimingTable,
    TopXRow,
    TopXTable,
    crossval,
    kfold_partition,
    rank_of_true_class,
    single_spec_top1_sweep,
    t_quantile_975,
    timing_bench,
    w_sweep,
)
from .grid import Grid, GridConfig, build_grid, default_grid, fingerprint_vector, single_spec_grid
from .lexicon import (
    Distribution,
    distribution,
    distribution_from_sequence,
    extract_lwords,
    write_distribution_csv,
)
from .ranking import RankedClass, modified_competition_ranks, rank_classes, rank_labeled_distances
from .synthetic import SynthConfig, synth_generate, synth_reference
from .trace_model import (
    CharType,
    ParseMode,
    RecordKind,
    SymbolSequence,
    SymbolTable,
    Trace,
    TraceRecord,
    encode,
    load_trace_file,
    parse_trace,
    render,
)

__version__ = "0.1.0"
