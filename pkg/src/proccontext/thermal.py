"""Classical thermal "all-at-once" model on a hypergraph, with site insertion.

Each site holds a value from a finite set containing ``0``, the empty site.
The Hamiltonian is a sum of hyperedge terms that vanish whenever one of their
sites is empty, so removing a site is just setting it to ``0``. At each site
the instrument is either "remove" (only ``0`` possible) or "insert" (any
nonzero value). Probabilities come from the Gibbs distribution by exact
enumeration.

The deterministic ontic model assigns one configuration ``a_x`` to every
instrument choice ``x`` in ``{0,1}^N``; its probability is the product of
thermal frame-function values. :func:`verify_omega_mediation` checks that
marginalising over these ontic processes returns the operational
probabilities.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Mapping, Sequence

import numpy as np

from ._backend import kernels
from .errors import DimensionError, ResourceError, ValidationError

MAX_CONFIGS = 10**7
MAX_ASSIGNMENTS = 10**7

Config = tuple


@dataclass(frozen=True)
class Hyperedge:
    sites: tuple[Hashable, ...]
    table: Mapping[tuple, float]

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        object.__setattr__(self, "table", {tuple(k): float(v) for k, v in dict(self.table).items()})
        if not self.sites:
            raise ValidationError("empty hyperedge")
        if len(set(self.sites)) != len(self.sites):
            raise ValidationError(f"hyperedge {self.sites} repeats a site")

    def energy(self, values: tuple) -> float:
        """Missing table entries count as zero."""
        return self.table.get(values, 0.0)


@dataclass(frozen=True, eq=False)
class ThermalModel:
    sites: tuple[Hashable, ...]
    state_sets: Mapping[Hashable, tuple]
    hyperedges: tuple[Hyperedge, ...]
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        object.__setattr__(self, "state_sets", {s: tuple(v) for s, v in dict(self.state_sets).items()})
        object.__setattr__(self, "hyperedges", tuple(self.hyperedges))
        object.__setattr__(self, "beta", float(self.beta))
        if len(set(self.sites)) != len(self.sites):
            raise ValidationError("duplicate site labels")
        if set(self.state_sets) != set(self.sites):
            raise ValidationError("state sets must be given for exactly the model's sites")
        for s, values in self.state_sets.items():
            if 0 not in values or len(set(values)) != len(values) or len(values) < 2:
                raise ValidationError(
                    f"site {s!r}: state set needs the empty value 0, distinct values and one nonzero value"
                )
        if not self.beta >= 0 or math.isinf(self.beta):
            raise ValidationError("beta must be a finite nonnegative number")
        for e in self.hyperedges:
            unknown = [s for s in e.sites if s not in self.state_sets]
            if unknown:
                raise ValidationError(f"hyperedge {e.sites} references unknown sites {unknown}")
            allowed = [self.state_sets[s] for s in e.sites]
            for key, val in e.table.items():
                if len(key) != len(e.sites) or any(v not in a for v, a in zip(key, allowed)):
                    raise ValidationError(f"hyperedge {e.sites}: entry {key} outside the state sets")
                if 0 in key and val != 0.0:
                    raise ValidationError(
                        f"hyperedge {e.sites}: term must vanish on an empty site, got {key} -> {val}"
                    )

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def size(self) -> int:
        return math.prod(len(self.state_sets[s]) for s in self.sites)

    # enumeration caches; order is itertools.product over sites in model order

    @cached_property
    def configs(self) -> list[Config]:
        if self.size() > MAX_CONFIGS:
            raise ResourceError(f"{self.size()} configurations exceed the guard {MAX_CONFIGS}")
        return list(itertools.product(*(self.state_sets[s] for s in self.sites)))

    @cached_property
    def energies(self) -> np.ndarray:
        return np.array([self._energy(c) for c in self.configs])

    @cached_property
    def _index(self) -> dict:
        return {c: i for i, c in enumerate(self.configs)}

    @cached_property
    def _position(self) -> dict:
        return {s: i for i, s in enumerate(self.sites)}

    @cached_property
    def patterns(self) -> list[tuple[int, ...]]:
        return [zero_pattern(c) for c in self.configs]

    @cached_property
    def _log_partition(self) -> dict:
        """``log Z(beta | pattern)`` per zero pattern, plus ``None`` for the total."""
        logw = -self.beta * self.energies
        groups: dict = {}
        for i, p in enumerate(self.patterns):
            groups.setdefault(p, []).append(i)
        out = {p: _logsumexp(logw[idx]) for p, idx in groups.items()}
        out[None] = _logsumexp(logw)
        return out

    def _energy(self, config: Config) -> float:
        pos = {s: i for i, s in enumerate(self.sites)}
        return float(sum(e.energy(tuple(config[pos[s]] for s in e.sites)) for e in self.hyperedges))

    def check_config(self, config: Sequence) -> Config:
        config = tuple(config)
        if len(config) != self.n_sites:
            raise DimensionError(f"configuration has {len(config)} entries for {self.n_sites} sites")
        for s, v in zip(self.sites, config):
            if v not in self.state_sets[s]:
                raise ValidationError(f"value {v!r} not allowed at site {s!r}")
        return config


def _logsumexp(v: np.ndarray) -> float:
    m = float(np.max(v))
    return m + math.log(float(np.sum(np.exp(v - m))))


def zero_pattern(config: Sequence) -> tuple[int, ...]:
    """Instrument choice implied by a configuration: 1 where a system is present."""
    return tuple(int(v != 0) for v in config)


def ising_model(
    n_sites: int, edges: Sequence[tuple[int, int]] | None = None, beta: float = 1.0, coupling: float = 1.0
) -> ThermalModel:
    """Sites ``1..n`` with values ``{0, +1, -1}`` and ``h = -J l_i l_j`` per edge (path by default)."""
    sites = tuple(range(1, n_sites + 1))
    if edges is None:
        edges = [(i, i + 1) for i in range(1, n_sites)]
    spins = (0, 1, -1)
    hyperedges = [
        Hyperedge(
            (i, j),
            {(a, b): -coupling * a * b for a in spins for b in spins if a and b},
        )
        for i, j in edges
    ]
    return ThermalModel(sites, {s: spins for s in sites}, tuple(hyperedges), beta)


def hamiltonian(model: ThermalModel, config: Sequence) -> float:
    return model._energy(model.check_config(config))


def gibbs_probability(model: ThermalModel, config: Sequence) -> float:
    """``exp(-beta H) / Z`` with ``Z`` summed over every configuration."""
    config = model.check_config(config)
    return math.exp(-model.beta * model._energy(config) - model._log_partition[None])


def frame_function(model: ThermalModel, config: Sequence) -> float:
    """Gibbs weight normalised over configurations sharing ``config``'s zero pattern."""
    config = model.check_config(config)
    return math.exp(-model.beta * model._energy(config) - model._log_partition[zero_pattern(config)])


def operational_probability(model: ThermalModel, choice: Sequence[int], config: Sequence) -> float:
    """``p(lambda | instruments) = f(lambda) * prod_j chi(lambda_j in I_j)``."""
    choice = tuple(int(b) for b in choice)
    if len(choice) != model.n_sites or any(b not in (0, 1) for b in choice):
        raise ValidationError("instrument choice must be one bit per site")
    config = model.check_config(config)
    if zero_pattern(config) != choice:
        return 0.0
    return frame_function(model, config)


def all_choices(n_sites: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=n_sites))


def configs_for_choice(model: ThermalModel, choice: Sequence[int]) -> list[Config]:
    choice = tuple(choice)
    return [c for c, p in zip(model.configs, model.patterns) if p == choice]


@dataclass
class OnticProcessAssignment:
    """One configuration per instrument choice."""

    table: dict[tuple[int, ...], Config]

    def check(self, model: ThermalModel) -> None:
        if set(self.table) != set(all_choices(model.n_sites)):
            raise ValidationError("assignment must give a configuration for every instrument choice")
        for x, a in self.table.items():
            model.check_config(a)
            if zero_pattern(a) != tuple(x):
                raise ValidationError(f"configuration {a} is inconsistent with instrument choice {x}")


def ontic_process_probability(model: ThermalModel, assignment: OnticProcessAssignment) -> float:
    """``P({a_x} | beta) = prod_x f_beta(a_x)``."""
    assignment.check(model)
    return math.prod(frame_function(model, a) for a in assignment.table.values())


def ontic_space_size(model: ThermalModel) -> int:
    counts: dict = {}
    for p in model.patterns:
        counts[p] = counts.get(p, 0) + 1
    return math.prod(counts.get(x, 0) for x in all_choices(model.n_sites))


def iter_assignments(model: ThermalModel):
    """Every ontic process, lexicographic in (choice, configuration)."""
    choices = all_choices(model.n_sites)
    pools = [configs_for_choice(model, x) for x in choices]
    for picks in itertools.product(*pools):
        yield OnticProcessAssignment(dict(zip(choices, picks)))


@dataclass
class MediationReport:
    max_residual: float
    n_assignments: int
    tol: float
    backend: str
    rows: list[dict] = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    def to_dict(self, include_rows: bool = True) -> dict:
        d = {
            "max_residual": self.max_residual,
            "n_assignments": self.n_assignments,
            "n_cells": len(self.rows),
            "tol": self.tol,
            "passed": self.passed,
        }
        if include_rows:
            d["rows"] = self.rows
        return d

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["choice", "config", "operational", "ontic", "residual"])
        for r in self.rows:
            writer.writerow(
                [
                    "".join(map(str, r["choice"])),
                    " ".join(map(str, r["config"])),
                    repr(r["operational"]),
                    repr(r["ontic"]),
                    repr(r["residual"]),
                ]
            )
        return buf.getvalue()


def verify_omega_mediation(model: ThermalModel, tol: float = 1e-12) -> MediationReport:
    """Compare the ontic-model marginal with the operational probabilities.

    For each instrument choice ``x`` and configuration ``lambda`` computes
    ``sum_a chi_x(lambda) sum_x' delta(lambda, a_x') prod_x'' f(a_x'')`` over
    all ontic processes ``a`` and checks it against
    :func:`operational_probability`.
    """
    n_assign = ontic_space_size(model)
    if n_assign > MAX_ASSIGNMENTS:
        raise ResourceError(f"{n_assign} ontic processes exceed the guard {MAX_ASSIGNMENTS}")
    choices = all_choices(model.n_sites)
    fvals, cfg_index, offsets = [], [], [0]
    for x in choices:
        for c in configs_for_choice(model, x):
            fvals.append(frame_function(model, c))
            cfg_index.append(model._index[c])
        offsets.append(len(fvals))
    marginal = kernels.omega_mediation(
        np.array(fvals, dtype=np.float64),
        np.array(offsets, dtype=np.int64),
        np.array(cfg_index, dtype=np.int64),
        len(model.configs),
    )

    from ._backend import BACKEND

    rows, worst = [], 0.0
    for x in choices:
        for i, c in enumerate(model.configs):
            ontic = float(marginal[i]) if model.patterns[i] == x else 0.0
            op = operational_probability(model, x, c)
            res = abs(ontic - op)
            worst = max(worst, res)
            rows.append({"choice": list(x), "config": list(c), "operational": op, "ontic": ontic, "residual": res})
    return MediationReport(worst, n_assign, tol, BACKEND, rows)


def site_marginal(model: ThermalModel, choice: Sequence[int], site: Hashable, given: Mapping | None = None) -> dict:
    """Distribution of one site's value under an instrument choice, optionally
    conditioned on observed values at other sites."""
    pos = model._position[site]
    given = dict(given or {})
    out: dict = {v: 0.0 for v in model.state_sets[site]}
    total = 0.0
    for c in model.configs:
        if any(c[model._position[s]] != v for s, v in given.items()):
            continue
        p = operational_probability(model, choice, c)
        out[c[pos]] += p
        total += p
    if total == 0.0:
        raise ValidationError("conditioning event has probability zero")
    return {v: p / total for v, p in out.items()}


def total_variation(p: Mapping, q: Mapping) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


# JSON: {"sites": [...], "state_sets": {site: [values]},
#        "hyperedges": [{"sites": [...], "table": {"v1,v2": value}}], "beta": b}


def _parse_key(key) -> tuple:
    if isinstance(key, str):
        return tuple(int(v) for v in key.replace("(", "").replace(")", "").split(",") if v.strip())
    return tuple(key)


def model_from_json(obj) -> ThermalModel:
    try:
        sites = [str(s) for s in obj["sites"]]
        state_sets = {str(s): tuple(int(v) for v in vals) for s, vals in obj["state_sets"].items()}
        edges = tuple(
            Hyperedge(tuple(str(s) for s in e["sites"]), {_parse_key(k): float(v) for k, v in e["table"].items()})
            for e in obj.get("hyperedges", [])
        )
        return ThermalModel(tuple(sites), state_sets, edges, float(obj["beta"]))
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValidationError(f"malformed model object: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed model object: {exc}") from exc


def model_to_json(model: ThermalModel) -> dict:
    return {
        "sites": [str(s) for s in model.sites],
        "state_sets": {str(s): list(v) for s, v in model.state_sets.items()},
        "hyperedges": [
            {"sites": [str(s) for s in e.sites], "table": {",".join(map(str, k)): v for k, v in e.table.items()}}
            for e in model.hyperedges
        ],
        "beta": model.beta,
    }
