"""Deterministic classical processes, including time-travelling (CTC) ones.

States are small integers. Region ``X`` owns an input set ``range(n_in)`` and
an output set ``range(n_out)``. A process is a tuple of lookup tables
``w^X``, each mapping the outputs of all *other* regions (mixed radix, first
region most significant) to an input of ``X``. Local operations are lookup
tables ``f^X`` from inputs to outputs. A process is valid when every choice of
local operations leaves exactly one consistent global assignment.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from ._backend import kernels
from .errors import DimensionError, ResourceError, ValidationError

MAX_OP_TUPLES = 10**7
MAX_SEARCH_WORK = 10**9


class ClassicalRegion(NamedTuple):
    label: str
    n_in: int
    n_out: int


@dataclass(frozen=True)
class StateSpaceSpec:
    regions: tuple[ClassicalRegion, ...]

    def __post_init__(self):
        regions = tuple(ClassicalRegion(*r) for r in self.regions)
        object.__setattr__(self, "regions", regions)
        if not regions:
            raise ValidationError("need at least one region")
        if any(r.n_in < 1 or r.n_out < 1 for r in regions):
            raise ValidationError("state-space cardinalities must be >= 1")
        labels = [r.label for r in regions]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate labels {labels}")

    @classmethod
    def uniform(cls, n_regions: int, cardinality: int) -> "StateSpaceSpec":
        labels = [chr(ord("A") + i) for i in range(n_regions)]
        return cls(tuple(ClassicalRegion(lab, cardinality, cardinality) for lab in labels))

    @property
    def n(self) -> int:
        return len(self.regions)

    @property
    def labels(self) -> list[str]:
        return [r.label for r in self.regions]

    def context_size(self, x: int) -> int:
        """Number of joint outputs of the regions other than ``x``."""
        return math.prod(r.n_out for i, r in enumerate(self.regions) if i != x)

    def n_processes(self) -> int:
        return math.prod(r.n_in ** self.context_size(x) for x, r in enumerate(self.regions))

    def n_op_tuples(self) -> int:
        return math.prod(r.n_out**r.n_in for r in self.regions)


@dataclass(frozen=True)
class LocalOperation:
    region: str
    table: tuple[int, ...]


@dataclass(frozen=True)
class GeneralInstrumentSet:
    region: str
    allowed: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "allowed", frozenset((int(a), int(b)) for a, b in self.allowed))
        if not self.allowed:
            raise ValidationError("an instrument must allow at least one input-output pair")

    @classmethod
    def from_operation(cls, op: LocalOperation) -> "GeneralInstrumentSet":
        return cls(op.region, frozenset(enumerate(op.table)))


@dataclass(frozen=True)
class DeterministicProcess:
    spec: StateSpaceSpec
    tables: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        tables = tuple(tuple(int(v) for v in t) for t in self.tables)
        object.__setattr__(self, "tables", tables)
        if len(tables) != self.spec.n:
            raise DimensionError(f"{len(tables)} tables for {self.spec.n} regions")
        for x, (t, r) in enumerate(zip(tables, self.spec.regions)):
            if len(t) != self.spec.context_size(x):
                raise DimensionError(f"table of region {r.label} has wrong length {len(t)}")
            if any(v < 0 or v >= r.n_in for v in t):
                raise ValidationError(f"table of region {r.label} leaves its input set")

    @classmethod
    def from_functions(
        cls, spec: StateSpaceSpec, funcs: Sequence[Callable[[tuple[int, ...]], int]]
    ) -> "DeterministicProcess":
        """Build tables from callables of the other regions' outputs."""
        tables = []
        for x in range(spec.n):
            others = [range(r.n_out) for i, r in enumerate(spec.regions) if i != x]
            tables.append(tuple(funcs[x](ctx) for ctx in itertools.product(*others)))
        return cls(spec, tuple(tables))

    @classmethod
    def from_index(cls, spec: StateSpaceSpec, index: int) -> "DeterministicProcess":
        """The ``index``-th process in lexicographic order of the tables."""
        tables = []
        for x in range(spec.n - 1, -1, -1):
            r, size = spec.regions[x], spec.context_size(x)
            code, index = index % (r.n_in**size), index // (r.n_in**size)
            table = []
            for _ in range(size):
                table.append(code % r.n_in)
                code //= r.n_in
            tables.append(tuple(reversed(table)))
        return cls(spec, tuple(reversed(tables)))

    def input_of(self, x: int, outputs: Sequence[int]) -> int:
        """``w^X`` evaluated on the full output tuple (own entry ignored)."""
        idx = 0
        for i, r in enumerate(self.spec.regions):
            if i != x:
                idx = idx * r.n_out + outputs[i]
        return self.tables[x][idx]

    def full_table(self) -> np.ndarray:
        """``wfull[X, o]`` indexed by the joint output of all regions."""
        spec = self.spec
        outs = list(itertools.product(*(range(r.n_out) for r in spec.regions)))
        return np.array(
            [[self.input_of(x, o) for o in outs] for x in range(spec.n)], dtype=np.int64
        ).reshape(spec.n, len(outs))

    def is_constant(self, x: int) -> bool:
        return len(set(self.tables[x])) == 1

    def has_constant_component(self) -> bool:
        return any(self.is_constant(x) for x in range(self.spec.n))

    def to_dict(self) -> dict:
        return {r.label: list(t) for r, t in zip(self.spec.regions, self.tables)}


def _ordered_ops(process: DeterministicProcess, ops: Sequence[LocalOperation]) -> list[tuple[int, ...]]:
    by_label = {op.region: op for op in ops}
    if sorted(by_label) != sorted(process.spec.labels) or len(ops) != process.spec.n:
        raise ValidationError("operations must cover each region exactly once")
    tables = []
    for r in process.spec.regions:
        t = tuple(by_label[r.label].table)
        if len(t) != r.n_in or any(v < 0 or v >= r.n_out for v in t):
            raise ValidationError(f"operation on {r.label} is not a function into its outputs")
        tables.append(t)
    return tables


def run_process(process: DeterministicProcess, ops: Sequence[LocalOperation]):
    """Unique fixed point as ``[(input, output), ...]`` per region, else ``None``."""
    fs = _ordered_ops(process, ops)
    spec = process.spec
    fixed = []
    for lam in itertools.product(*(range(r.n_in) for r in spec.regions)):
        outs = [fs[x][lam[x]] for x in range(spec.n)]
        if all(process.input_of(x, outs) == lam[x] for x in range(spec.n)):
            fixed.append([(lam[x], outs[x]) for x in range(spec.n)])
    return fixed[0] if len(fixed) == 1 else None


def all_operations(region: ClassicalRegion) -> list[LocalOperation]:
    return [
        LocalOperation(region.label, t)
        for t in itertools.product(range(region.n_out), repeat=region.n_in)
    ]


def is_valid_process(process: DeterministicProcess, guard: int = MAX_OP_TUPLES) -> bool:
    spec = process.spec
    if spec.n_op_tuples() > guard:
        raise ResourceError(f"{spec.n_op_tuples()} operation tuples exceed the guard {guard}")
    k_in = np.array([r.n_in for r in spec.regions], dtype=np.int64)
    k_out = np.array([r.n_out for r in spec.regions], dtype=np.int64)
    return bool(kernels.process_valid(process.full_table(), k_in, k_out))


@dataclass
class ClassificationReport:
    spec: StateSpaceSpec
    n_processes: int
    valid: list[DeterministicProcess]

    @property
    def n_valid(self) -> int:
        return len(self.valid)

    @property
    def without_constant(self) -> list[DeterministicProcess]:
        return [p for p in self.valid if not p.has_constant_component()]

    @property
    def all_valid_have_constant(self) -> bool:
        return not self.without_constant

    def to_dict(self, max_examples: int = 20) -> dict:
        return {
            "regions": [r._asdict() for r in self.spec.regions],
            "n_processes": self.n_processes,
            "n_valid": self.n_valid,
            "n_valid_with_constant_component": self.n_valid - len(self.without_constant),
            "n_valid_without_constant_component": len(self.without_constant),
            "all_valid_have_constant_component": self.all_valid_have_constant,
            "examples_without_constant_component": [
                p.to_dict() for p in self.without_constant[:max_examples]
            ],
            "examples_valid": [p.to_dict() for p in self.valid[:max_examples]],
        }


def _valid_indices(spec: StateSpaceSpec, indices: Iterable[int]) -> list[int]:
    return [i for i in indices if is_valid_process(DeterministicProcess.from_index(spec, i))]


def classify_processes(spec: StateSpaceSpec, jobs: int = 1) -> ClassificationReport:
    """Exhaustively test every process on ``spec`` for validity."""
    n_proc, n_ops = spec.n_processes(), spec.n_op_tuples()
    if n_ops > MAX_OP_TUPLES or n_proc * n_ops > MAX_SEARCH_WORK:
        raise ResourceError(f"{n_proc} processes x {n_ops} operation tuples is too large")
    if jobs <= 1:
        found = _valid_indices(spec, range(n_proc))
    else:
        chunks = [range(s, min(s + 256, n_proc)) for s in range(0, n_proc, 256)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_valid_indices, [spec] * len(chunks), chunks)
            found = [i for part in parts for i in part]
    valid = [DeterministicProcess.from_index(spec, i) for i in sorted(found)]
    return ClassificationReport(spec, n_proc, valid)


def run_general_instruments(
    process: DeterministicProcess, instruments: Sequence[GeneralInstrumentSet]
) -> set[tuple[tuple[int, int], ...]]:
    """Every joint assignment of (input, output) pairs allowed by the
    instruments and consistent with the process."""
    spec = process.spec
    by_label = {ins.region: ins for ins in instruments}
    if sorted(by_label) != sorted(spec.labels) or len(instruments) != spec.n:
        raise ValidationError("instruments must cover each region exactly once")
    pools = [sorted(by_label[r.label].allowed) for r in spec.regions]
    result = set()
    for pairs in itertools.product(*pools):
        outs = [o for _, o in pairs]
        if all(process.input_of(x, outs) == pairs[x][0] for x in range(spec.n)):
            result.add(tuple(pairs))
    return result
