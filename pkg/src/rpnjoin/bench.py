"""Benchmark grid: evaluation time across tuple counts, relation counts, and
tree shapes, emitted as one CSV row per measured cell.

Per cell, relations are generated deterministically from the config seed and
the cell coordinates, then each requested shape is flattened to its program
and timed over several repetitions (warmup runs excluded, median reported).
Generation and plan construction stay outside the timed region.

A cell whose joins would blow the output cap is recorded with status
`cap_exceeded` instead of crashing the grid. The exact output size of every
intermediate join is known from key histograms alone, so such cells are
detected up front without materializing anything.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field, replace
from hashlib import blake2b
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .engine import EvalContext, eval_rpn
from .errors import CardinalityLimitError
from .joins import ALGORITHMS, JoinResultPolicy
from .plans import Operand, RpnProgram, make_bushy_plan, make_linear_plan, to_rpn
from .relations import Catalog, generate_relation, key_histogram

SHAPES = ("linear", "bushy")
PAIRED = "paired"
CROSS = "cross"
STATUS_OK = "ok"
STATUS_CAP = "cap_exceeded"

RESULTS_HEADER = (
    "shape,algorithm,tuples,relations,key_lo,key_hi,seed,"
    "median_ms,result_cardinality,status"
)

_SHAPE_BUILDERS = {"linear": make_linear_plan, "bushy": make_bushy_plan}


@dataclass(frozen=True)
class BenchConfig:
    """One grid description: sizes, shapes, algorithm, and timing knobs.

    With pairing="paired" the tuple and relation lists are zipped (they must
    have equal lengths); with "cross" every combination is a cell. key_range
    of None picks [0, max(1, tuples // 10)) per cell, which keeps joins
    many-to-many with an expected fan-out around 10.
    """

    tuples_per_relation: Sequence[int]
    relation_counts: Sequence[int]
    seed: int = 0
    key_range: tuple[int, int] | None = None
    shapes: Sequence[str] = SHAPES
    algorithm: str = "sortmerge"
    repetitions: int = 5
    warmup: int = 1
    pairing: str = PAIRED
    policy: JoinResultPolicy = field(default_factory=JoinResultPolicy)

    def __post_init__(self) -> None:
        if not self.tuples_per_relation or any(t < 1 for t in self.tuples_per_relation):
            raise ValueError("tuples_per_relation must be a non-empty list of positive ints")
        if not self.relation_counts or any(k < 2 for k in self.relation_counts):
            raise ValueError("relation_counts must be a non-empty list of ints >= 2")
        bad = set(self.shapes) - set(SHAPES)
        if not self.shapes or bad:
            raise ValueError(f"shapes must be a non-empty subset of {SHAPES}, got {self.shapes}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")
        if self.pairing not in (PAIRED, CROSS):
            raise ValueError(f"pairing must be {PAIRED!r} or {CROSS!r}")
        if self.pairing == PAIRED and len(self.tuples_per_relation) != len(self.relation_counts):
            raise ValueError("paired grids need equally long tuple and relation lists")

    def cells(self) -> list[tuple[int, int]]:
        if self.pairing == PAIRED:
            return list(zip(self.tuples_per_relation, self.relation_counts))
        return [(t, k) for t in self.tuples_per_relation for k in self.relation_counts]


@dataclass(frozen=True)
class BenchRecord:
    """One measured grid cell for one shape."""

    shape: str
    algorithm: str
    tuples: int
    relations: int
    key_lo: int
    key_hi: int
    seed: int
    median_ms: float
    result_cardinality: int
    status: str


def _mix_seed(seed: int, label: str) -> int:
    """Deterministic 63-bit seed derivation; never touches Python's hash()."""
    digest = blake2b(label.encode("ascii"), digest_size=8).digest()
    return (seed ^ int.from_bytes(digest, "big")) & (2**63 - 1)


def _program_exceeds_cap(program: RpnProgram, hists: Mapping[str, Mapping[int, int]],
                         cap: int) -> bool:
    """Simulate the program on key histograms; True if any join output > cap.

    Histograms multiply pointwise across a join, so every intermediate
    cardinality is exact without building a single tuple.
    """
    stack: list[Mapping[int, int]] = []
    for token in program:
        if isinstance(token, Operand):
            stack.append(hists[token.name])
        else:
            right = stack.pop()
            left = stack.pop()
            if len(right) < len(left):
                left, right = right, left
            merged = {key: count * right[key] for key, count in left.items() if key in right}
            if sum(merged.values()) > cap:
                return True
            stack.append(merged)
    return False


def run_benchmark(config: BenchConfig) -> list[BenchRecord]:
    """Execute every grid cell for every shape and return the records.

    All fields except median_ms are reproducible bit-for-bit from the config.
    """
    records: list[BenchRecord] = []
    for tuples, relations in config.cells():
        key_lo, key_hi = config.key_range or (0, max(1, tuples // 10))
        cell_seed = _mix_seed(config.seed, f"cell:{tuples}x{relations}")
        base = [
            generate_relation(f"R{i + 1}", tuples, key_lo, key_hi,
                              _mix_seed(cell_seed, f"rel:{i}"))
            for i in range(relations)
        ]
        catalog = Catalog(base)
        names = [rel.name for rel in base]
        hists = {rel.name: key_histogram(rel) for rel in base}
        for shape in config.shapes:
            program = to_rpn(_SHAPE_BUILDERS[shape](names))
            stub = BenchRecord(
                shape=shape, algorithm=config.algorithm, tuples=tuples,
                relations=relations, key_lo=key_lo, key_hi=key_hi, seed=cell_seed,
                median_ms=0.0, result_cardinality=0, status=STATUS_CAP,
            )
            if _program_exceeds_cap(program, hists, config.policy.max_output_tuples):
                records.append(stub)
                continue
            timings: list[float] = []
            cardinality = 0
            try:
                for rep in range(config.warmup + config.repetitions):
                    ctx = EvalContext(catalog=catalog, algorithm=config.algorithm,
                                      policy=config.policy)
                    start = time.perf_counter()
                    result = eval_rpn(program, ctx)
                    elapsed_ms = (time.perf_counter() - start) * 1000.0
                    if rep >= config.warmup:
                        timings.append(elapsed_ms)
                    cardinality = result.cardinality()
            except CardinalityLimitError:
                # unreachable while the histogram precheck is exact; kept so a
                # blown cap can never take down the rest of the grid
                records.append(stub)
                continue
            records.append(replace(
                stub,
                median_ms=statistics.median(timings),
                result_cardinality=cardinality,
                status=STATUS_OK,
            ))
    return records


def write_results_csv(records: Iterable[BenchRecord], path: str | Path) -> None:
    """Write records sorted by (tuples, relations, shape); timings get 3 decimals."""
    ordered = sorted(records, key=lambda r: (r.tuples, r.relations, r.shape))
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(RESULTS_HEADER + "\n")
        for r in ordered:
            fh.write(
                f"{r.shape},{r.algorithm},{r.tuples},{r.relations},{r.key_lo},"
                f"{r.key_hi},{r.seed},{r.median_ms:.3f},{r.result_cardinality},{r.status}\n"
            )


def read_results_csv(path: str | Path) -> list[BenchRecord]:
    """Read back a results CSV written by :func:`write_results_csv`."""
    records: list[BenchRecord] = []
    with open(path, "r", encoding="ascii", newline="") as fh:
        header = fh.readline().rstrip("\r\n")
        if header != RESULTS_HEADER:
            raise ValueError(f"unexpected results header {header!r}")
        for line in fh:
            line = line.rstrip("\r\n")
            if not line:
                continue
            (shape, algorithm, tuples, relations, key_lo, key_hi, seed,
             median_ms, cardinality, status) = line.split(",")
            records.append(BenchRecord(
                shape=shape, algorithm=algorithm, tuples=int(tuples),
                relations=int(relations), key_lo=int(key_lo), key_hi=int(key_hi),
                seed=int(seed), median_ms=float(median_ms),
                result_cardinality=int(cardinality), status=status,
            ))
    return records
