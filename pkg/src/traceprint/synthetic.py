"""Seeded synthetic trace corpus for evaluation and benchmarks.

Each class gets an archetype: a deterministic random call tree drawn
over that class's own subset of a shared function pool. Traces of the
class are record-level mutations (drop / rename / insert) of the
archetype's linearization, so mutation_rate=0 yields identical traces
and the corpus is byte-identical for a fixed seed.
"""

import random
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidConfig
from .trace_model import ParseMode, Trace, parse_trace

__all__ = ["SynthConfig", "synth_generate", "synth_reference"]

_ENTRY = "entry"
_EXIT = "exit"


@dataclass(frozen=True)
class SynthConfig:
    num_classes: int = 20
    traces_per_class: int = 50
    mutation_rate: float = 0.05
    seed: int = 0
    functions: int = 30
    depth: int = 5
    branching: int = 3
    target_records: int = 300

    def __post_init__(self):
        if self.num_classes < 1 or self.traces_per_class < 1:
            raise InvalidConfig("need at least one class and one trace per class")
        if not 0 <= self.mutation_rate < 1:
            raise InvalidConfig(f"mutation rate must be in [0, 1), got {self.mutation_rate}")
        if self.functions < 2 or self.depth < 1 or self.branching < 1:
            raise InvalidConfig("need >= 2 functions, depth >= 1, branching >= 1")
        if self.target_records < 2:
            raise InvalidConfig("archetypes need at least 2 records")


def _pool(functions: int) -> list[str]:
    return [f"fn{i:02d}" for i in range(functions)]


def _emit_call(rng: random.Random, names, depth_left: int, branching: int, out: list) -> None:
    name = rng.choice(names)
    out.append((name, _ENTRY))
    if depth_left > 0:
        for _ in range(rng.randint(1, branching)):
            _emit_call(rng, names, depth_left - 1, branching, out)
    out.append((name, _EXIT))


def _archetype(rng: random.Random, names, depth: int, branching: int, target: int) -> list:
    records: list[tuple[str, str]] = []
    while len(records) < target:
        _emit_call(rng, names, depth, branching, records)
    # a prefix of a balanced call sequence is still a legal trace
    return records[:target]


def _mutate(rng: random.Random, records, rate: float, pool) -> list:
    if rate == 0:
        return list(records)
    out = []
    for name, kind in records:
        if rng.random() < rate:
            op = rng.randrange(3)
            if op == 0:
                continue
            if op == 1:
                out.append((rng.choice(pool), kind))
                continue
            out.append((rng.choice(pool), rng.choice((_ENTRY, _EXIT))))
        out.append((name, kind))
    return out


def _render_lines(records) -> str:
    return "".join(f"{name} {kind}\n" for name, kind in records)


def _class_rng(config: SynthConfig, c: int) -> random.Random:
    return random.Random(config.seed * 1000003 + c)


def synth_generate(config: SynthConfig, out_dir: str | Path) -> Path:
    """Write the corpus and return the manifest path.

    Layout: one .trace file per trace plus manifest.csv with
    trace_file,class_id rows, paths relative to the manifest.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pool = _pool(config.functions)
    subset_size = max(2, config.functions // 2)
    rows = []
    for c in range(config.num_classes):
        crng = _class_rng(config, c)
        names = crng.sample(pool, subset_size)
        archetype = _archetype(crng, names, config.depth, config.branching, config.target_records)
        class_id = f"class{c:02d}"
        for i in range(config.traces_per_class):
            trng = random.Random((config.seed * 1000003 + c) * 1009 + i)
            records = _mutate(trng, archetype, config.mutation_rate, pool)
            fname = f"{class_id}_trace{i:03d}.trace"
            (out / fname).write_text(_render_lines(records), encoding="utf-8", newline="\n")
            rows.append((fname, class_id))
    manifest = out / "manifest.csv"
    manifest.write_text(
        "trace_file,class_id\n" + "".join(f"{f},{cid}\n" for f, cid in rows),
        encoding="utf-8",
        newline="\n",
    )
    return manifest


def synth_reference(target_records: int, seed: int, functions: int = 30) -> Trace:
    """One unmutated trace of exactly target_records records."""
    if target_records < 1:
        raise InvalidConfig("reference needs at least 1 record")
    rng = random.Random(seed)
    records = _archetype(rng, _pool(functions), 5, 3, target_records)
    return parse_trace(_render_lines(records), ParseMode.STRICT, f"ref{target_records}")
