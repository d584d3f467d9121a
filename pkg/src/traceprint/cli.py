"""Command-line front end: ingest, fingerprint, query, crossval, bench, synth.

One binary with subcommands, matching the analyst workflow of indexing a
trace library once and querying it many times. Exit codes: 0 success,
1 any library error (printed as one `ErrorName: message` line), 2 usage.
"""

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .corpus import CorpusIndex, PrefilterPolicy, ingest, load, read_manifest_csv, save
from .distance import MultiSpecDistance, SingleSpecDistance
from .entropy import EntropySpec, fingerprint
from .errors import TraceprintError, UsageError
from .evaluation import crossval, timing_bench, w_sweep
from .grid import default_grid, fingerprint_vector, single_spec_grid
from .ranking import rank_classes
from .synthetic import SynthConfig, synth_generate
from .trace_model import ParseMode, load_trace_file

INDEX_ENV = "TRACEPRINT_INDEX"

_POLICIES = {
    "off": PrefilterPolicy.OFF,
    "intersect": PrefilterPolicy.INTERSECT,
    "superset": PrefilterPolicy.SUPERSET,
}


def _parse_spec(text: str) -> EntropySpec:
    try:
        return EntropySpec.parse(text)
    except Exception as exc:
        raise UsageError(f"bad spec {text!r}: {exc}") from exc


def _index_path(args) -> Path:
    path = args.index or os.environ.get(INDEX_ENV)
    if not path:
        raise UsageError(f"no index path given: pass --index or set {INDEX_ENV}")
    return Path(path)


def _parse_mode(args) -> ParseMode:
    return ParseMode.STRICT if args.strict else ParseMode.LENIENT


def _emit(headers: list[str], rows: list[list[str]], fmt: str) -> None:
    if fmt == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(headers)
        writer.writerows(rows)
        return
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip())
    for row in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())


def _num(value: float, fmt: str) -> str:
    return repr(float(value)) if fmt == "csv" else f"{value:.6f}"


def cmd_ingest(args) -> int:
    grid = single_spec_grid(_parse_spec(args.spec)) if args.spec else default_grid()
    items = read_manifest_csv(args.manifest)
    mode = _parse_mode(args)
    index = CorpusIndex(grid, retain_raw=args.retain_raw)

    def prepare(item):
        path, class_id = item
        trace = load_trace_file(path, mode)
        return trace, class_id, fingerprint_vector(trace, grid)

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        for trace, class_id, vector in pool.map(prepare, items):
            ingest(trace, class_id, index, vector)
    out = _index_path(args)
    save(index, out)
    print(f"ingested {len(index)} traces x {len(grid.specs)} specs -> {out}")
    return 0


def cmd_fingerprint(args) -> int:
    trace = load_trace_file(args.trace, _parse_mode(args))
    if args.spec:
        spec = _parse_spec(args.spec)
        print(_num(fingerprint(trace, spec), args.format))
        return 0
    grid = default_grid()
    vector = fingerprint_vector(trace, grid)
    rows = [[spec.label(), _num(v, args.format)] for spec, v in zip(grid.specs, vector.values)]
    _emit(["spec", "value"], rows, args.format)
    return 0


def cmd_query(args) -> int:
    index = load(_index_path(args))
    trace = load_trace_file(args.trace, _parse_mode(args))
    if args.spec:
        config = SingleSpecDistance(_parse_spec(args.spec))
    else:
        if args.w < 1:
            raise UsageError(f"--w must be >= 1, got {args.w}")
        config = MultiSpecDistance(w=args.w)
    ranked = rank_classes(trace, index, config, args.top, _POLICIES[args.prefilter])
    rows = [
        [str(r.rank), r.class_id, r.nearest_trace_id, _num(r.distance, args.format)]
        for r in ranked
    ]
    _emit(["rank", "class", "nearest_trace", "distance"], rows, args.format)
    return 0


def cmd_crossval(args) -> int:
    index = load(_index_path(args))
    if args.w_sweep:
        try:
            w_values = [float(w) for w in args.w_sweep.split(",") if w]
        except ValueError as exc:
            raise UsageError(f"bad --w-sweep list: {exc}") from exc
        results = w_sweep(index, w_values, args.folds, args.seed, args.threads)
        rows = [
            [f"{w:g}", _num(t.fraction_at(1), args.format), _num(t.fraction_at(5), args.format)]
            for w, t in results
        ]
        _emit(["w", "top1", "top5"], rows, args.format)
        return 0
    if args.spec:
        config = SingleSpecDistance(_parse_spec(args.spec))
    else:
        if args.w < 1:
            raise UsageError(f"--w must be >= 1, got {args.w}")
        config = MultiSpecDistance(w=args.w)
    table = crossval(index, config, args.folds, args.seed, args.threads)
    if args.format == "table":
        print(f"# {table.config}; {table.folds} folds", file=sys.stderr)
    rows = [
        [str(r.x), _num(r.fraction, args.format), _num(r.ci_half_width, args.format)]
        for r in table.rows
    ]
    _emit(["x", "fraction", "ci_half_width"], rows, args.format)
    return 0


def cmd_bench(args) -> int:
    index = load(_index_path(args))
    paths = [p for p in args.refs.split(",") if p]
    if len(paths) != 3:
        raise UsageError(f"--refs needs small,medium,large (3 paths), got {len(paths)}")
    mode = _parse_mode(args)
    refs = {
        label: load_trace_file(path, mode)
        for label, path in zip(("small", "medium", "large"), paths)
    }
    spec = _parse_spec(args.spec)
    table = timing_bench(index, refs, spec, args.reps)
    rows = [
        [
            algorithm,
            label,
            str(table.ref_records[label]),
            repr(table.seconds[(algorithm, label)])
            if args.format == "csv"
            else f"{table.seconds[(algorithm, label)]:.6f}",
        ]
        for algorithm in table.ALGORITHMS
        for label in table.labels
    ]
    _emit(["algorithm", "reference", "records", "seconds"], rows, args.format)
    return 0


def cmd_synth(args) -> int:
    config = SynthConfig(
        num_classes=args.classes,
        traces_per_class=args.per_class,
        mutation_rate=args.rate,
        seed=args.seed,
        functions=args.functions,
        target_records=args.target_records,
    )
    manifest = synth_generate(config, args.out)
    print(manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "csv"), default="table")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--strict", action="store_true", help="reject unbalanced traces")

    parser = argparse.ArgumentParser(
        prog="traceprint",
        description="Entropy fingerprints for execution traces: index, query, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="fingerprint a manifest of traces into an index")
    p.add_argument("manifest", help="CSV of trace_file,class_id rows")
    p.add_argument("--index", help=f"output index path (default ${INDEX_ENV})")
    p.add_argument("--spec", help="single spec E,q,l,c instead of the default grid")
    p.add_argument("--retain-raw", action="store_true", help="keep trace text for the diff baseline")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fingerprint", parents=[common], help="print fingerprint(s) of one trace")
    p.add_argument("trace")
    p.add_argument("--spec", help="single spec E,q,l,c; default: whole default grid")
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("query", parents=[common], help="rank indexed classes by distance to a trace")
    p.add_argument("trace")
    p.add_argument("--index", help=f"index path (default ${INDEX_ENV})")
    p.add_argument("--top", type=int, help="report classes ranked within X")
    p.add_argument("--prefilter", choices=sorted(_POLICIES), default="off")
    p.add_argument("--w", type=float, default=1.0, help="norm exponent for whole-grid distance")
    p.add_argument("--spec", help="rank on one spec E,q,l,c instead of the whole grid")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("crossval", parents=[common], help="k-fold classification accuracy of an index")
    p.add_argument("--index", help=f"index path (default ${INDEX_ENV})")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--w", type=float, default=1.0)
    p.add_argument("--spec", help="evaluate one spec E,q,l,c instead of the whole grid")
    p.add_argument("--w-sweep", help="comma list of w values; reports top1/top5 per w")
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("bench", parents=[common], help="compare query cost of entropy vs diff")
    p.add_argument("--index", help=f"index path (default ${INDEX_ENV})")
    p.add_argument("--refs", required=True, help="small,medium,large reference trace paths")
    p.add_argument("--reps", type=int, default=5, help="repetitions per cell (median reported)")
    p.add_argument("--spec", default="S,1,1,F", help="spec for the single-entropy row")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", parents=[common], help="generate a seeded synthetic corpus")
    p.add_argument("--classes", type=int, default=20)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--rate", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--functions", type=int, default=30)
    p.add_argument("--target-records", type=int, default=300)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "top", None) is not None and args.top < 1:
        print("UsageError: --top must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"UsageError: {exc}", file=sys.stderr)
        return 2
    except TraceprintError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
