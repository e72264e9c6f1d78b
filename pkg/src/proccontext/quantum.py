"""Events, instruments, process matrices and the generalised Born rule.

Conventions
-----------
Choi matrices are unnormalised with the input factor first::

    C(M) = sum_rs |r><s| (x) M(|r><s|)

so a CPTP map has ``Tr_out C = 1_in`` and ``tr C = dim_in``. Probabilities are
``tr[(M^A (x) M^B (x) ...) W]``. With this pairing a quantum state ``rho`` fed
into a region is the process ``rho^T`` and a channel ``C`` from ``A_O`` to
``B_I`` is the process ``C^T`` (full transpose of its Choi matrix). A POVM
element ``E`` is the event ``E^T``; a preparation of ``rho`` is the event
``rho``. This is the only place the transpose convention is fixed; every
constructor below follows it, so ``tr[E^T rho^T] = tr[rho E]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .errors import DimensionError, NumericalConsistencyError, ValidationError
from .linalg import DEFAULT_TOL


@dataclass(frozen=True)
class RegionSpec:
    label: str
    dim_in: int
    dim_out: int

    def __post_init__(self):
        if self.dim_in < 1 or self.dim_out < 1:
            raise ValidationError(f"region {self.label!r}: dimensions must be >= 1")

    @property
    def dim(self) -> int:
        return self.dim_in * self.dim_out


@dataclass(frozen=True, eq=False)
class CpMap:
    """Choi matrix of a completely positive, trace-non-increasing map."""

    choi: np.ndarray
    dim_in: int
    dim_out: int
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        choi = linalg.as_matrix(self.choi)
        object.__setattr__(self, "choi", choi)
        d = self.dim_in * self.dim_out
        if self.dim_in < 1 or self.dim_out < 1 or choi.shape != (d, d):
            raise DimensionError(
                f"Choi matrix of shape {choi.shape} does not fit "
                f"dim_in={self.dim_in}, dim_out={self.dim_out}"
            )
        if not linalg.is_psd(choi, self.tol):
            raise ValidationError("Choi matrix is not positive semidefinite")
        slack = np.eye(self.dim_in) - self.input_marginal()
        if not linalg.is_psd(slack, self.tol):
            raise ValidationError("map is trace-increasing")

    def input_marginal(self) -> np.ndarray:
        return linalg.partial_trace(self.choi, [self.dim_in, self.dim_out], [0])

    def is_trace_preserving(self, tol: float = DEFAULT_TOL) -> bool:
        return bool(np.max(np.abs(self.input_marginal() - np.eye(self.dim_in))) <= tol)

    def apply(self, rho) -> np.ndarray:
        """Action of the map on an operator of the input space."""
        rho = linalg.as_matrix(rho)
        t = self.choi.reshape(self.dim_in, self.dim_out, self.dim_in, self.dim_out)
        return np.einsum("rasb,rs->ab", t, rho)


@dataclass(frozen=True, eq=False)
class Instrument:
    """CP maps whose sum is trace preserving."""

    events: tuple[CpMap, ...]
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        events = tuple(self.events)
        object.__setattr__(self, "events", events)
        if not events:
            raise ValidationError("an instrument needs at least one event")
        dims = {(e.dim_in, e.dim_out) for e in events}
        if len(dims) != 1:
            raise DimensionError(f"events disagree on dimensions: {sorted(dims)}")
        if not self.total().is_trace_preserving(self.tol):
            raise ValidationError("events do not sum to a trace-preserving map")

    @property
    def dim_in(self) -> int:
        return self.events[0].dim_in

    @property
    def dim_out(self) -> int:
        return self.events[0].dim_out

    def total(self) -> CpMap:
        return CpMap(sum(e.choi for e in self.events), self.dim_in, self.dim_out, self.tol)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


@dataclass(frozen=True, eq=False)
class ProcessMatrix:
    """Positive operator over ``A_I (x) A_O (x) B_I (x) B_O ...``.

    Positivity and shape are checked on construction; normalisation is an
    operational property checked by :func:`validate_process`.
    """

    regions: tuple[RegionSpec, ...]
    matrix: np.ndarray
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        regions = tuple(self.regions)
        object.__setattr__(self, "regions", regions)
        m = linalg.as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        labels = [r.label for r in regions]
        if not regions:
            raise ValidationError("a process needs at least one region")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate region labels {labels}")
        if labels != sorted(labels):
            raise ValidationError(f"regions must be ordered by label, got {labels}")
        d = int(np.prod([r.dim for r in regions]))
        if m.shape != (d, d):
            raise DimensionError(f"matrix shape {m.shape} does not match regions (size {d})")
        if not linalg.is_psd(m, self.tol):
            raise ValidationError("process matrix is not positive semidefinite")

    @property
    def factor_dims(self) -> list[int]:
        return [d for r in self.regions for d in (r.dim_in, r.dim_out)]

    @property
    def region_dims(self) -> list[int]:
        return [r.dim for r in self.regions]

    def same_shape(self, other: "ProcessMatrix") -> bool:
        return self.regions == other.regions


# --- constructors -----------------------------------------------------------


def choi_from_kraus(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_k sum_rs |r><s| (x) K|r><s|K^dag`` for Kraus operators ``K``."""
    total = None
    for k in kraus:
        k = linalg.as_matrix(k)
        d_out, d_in = k.shape
        # sum_rs |r><s| (x) K|r><s|K^dag = |v><v| with v = sum_r |r> (x) K|r>
        v = np.einsum("rs,ar->ra", np.eye(d_in), k).reshape(d_in * d_out)
        term = np.outer(v, v.conj())
        total = term if total is None else total + term
    if total is None:
        raise ValidationError("need at least one Kraus operator")
    return total


def choi_of_unitary(u, tol: float = DEFAULT_TOL) -> CpMap:
    """Choi matrix ``sum_rs |r><s| (x) U|r><s|U^dag`` of the unitary channel ``U``."""
    u = linalg.as_matrix(u)
    if not linalg.is_unitary(u, tol):
        raise ValidationError("matrix is not unitary")
    d = u.shape[0]
    return CpMap(choi_from_kraus([u]), d, d, tol)


def preparation_event(rho, tol: float = DEFAULT_TOL) -> CpMap:
    """Event with trivial input that prepares ``rho`` (unnormalised allowed)."""
    rho = linalg.as_matrix(rho)
    return CpMap(rho, 1, rho.shape[0], tol)


def povm_event(effect, tol: float = DEFAULT_TOL) -> CpMap:
    """Event with trivial output registering the effect ``E``."""
    effect = linalg.as_matrix(effect)
    return CpMap(effect.T, effect.shape[0], 1, tol)


def state_process(rho, label: str = "A", tol: float = DEFAULT_TOL) -> ProcessMatrix:
    """Single region receiving ``rho`` at its input, with a trivial output."""
    rho = linalg.as_matrix(rho)
    return ProcessMatrix((RegionSpec(label, rho.shape[0], 1),), rho.T, tol)


def channel_process(
    choi, dim_in: int, dim_out: int, source: str = "A", target: str = "B", tol: float = DEFAULT_TOL
) -> ProcessMatrix:
    """Channel from ``source``'s output to ``target``'s input, other ends trivial."""
    choi = linalg.as_matrix(choi)
    if choi.shape != (dim_in * dim_out,) * 2:
        raise DimensionError("Choi shape does not match the given dimensions")
    w = choi.T
    src, tgt = RegionSpec(source, 1, dim_in), RegionSpec(target, dim_out, 1)
    if source < target:
        return ProcessMatrix((src, tgt), w, tol)
    w = linalg.permute_factors(w, [dim_in, dim_out], [1, 0])
    return ProcessMatrix((tgt, src), w, tol)


def sequential_process(
    rho, channel_choi, first: RegionSpec, second: RegionSpec, tol: float = DEFAULT_TOL
) -> ProcessMatrix:
    """Two regions in a definite order: ``rho`` into ``first``, a channel from
    ``first``'s output to ``second``'s input, ``second``'s output discarded."""
    rho, channel_choi = linalg.as_matrix(rho), linalg.as_matrix(channel_choi)
    if rho.shape[0] != first.dim_in:
        raise DimensionError("state does not fit the first region's input")
    if channel_choi.shape[0] != first.dim_out * second.dim_in:
        raise DimensionError("channel does not connect the two regions")
    w = linalg.kron(rho.T, channel_choi.T, np.eye(second.dim_out))
    dims = [first.dim_in, first.dim_out, second.dim_in, second.dim_out]
    if first.label < second.label:
        return ProcessMatrix((first, second), w, tol)
    w = linalg.permute_factors(w, dims, [2, 3, 0, 1])
    return ProcessMatrix((second, first), w, tol)


def convex_mix(processes: Sequence[ProcessMatrix], weights: Sequence[float]) -> ProcessMatrix:
    """Probabilistic mixture ``sum_i p_i W_i`` of processes on the same regions."""
    processes, weights = list(processes), [float(p) for p in weights]
    if not processes or len(processes) != len(weights):
        raise ValidationError("need one weight per process")
    if min(weights) < 0 or abs(sum(weights) - 1.0) > 1e-12:
        raise ValidationError(f"weights must be a probability vector, got {weights}")
    regions = processes[0].regions
    if any(p.regions != regions for p in processes):
        raise DimensionError("processes are defined on different regions")
    m = sum(p * w.matrix for p, w in zip(weights, processes))
    return ProcessMatrix(regions, m, processes[0].tol)


# --- Born rule ---------------------------------------------------------------


def _check_events(events: Sequence[CpMap], w: ProcessMatrix) -> None:
    if len(events) != len(w.regions):
        raise DimensionError(f"{len(events)} events for {len(w.regions)} regions")
    for e, r in zip(events, w.regions):
        if (e.dim_in, e.dim_out) != (r.dim_in, r.dim_out):
            raise DimensionError(
                f"event of dims ({e.dim_in}, {e.dim_out}) does not fit region "
                f"{r.label!r} ({r.dim_in}, {r.dim_out})"
            )


def born_probability(events: Sequence[CpMap], w: ProcessMatrix, tol: float = DEFAULT_TOL) -> float:
    """``tr[(M^A (x) M^B (x) ...) W]`` for one event per region, in region order."""
    events = list(events)
    _check_events(events, w)
    big = events[0].choi if len(events) == 1 else linalg.kron(*(e.choi for e in events))
    p = np.trace(big @ w.matrix)
    if abs(p.imag) >= tol:
        raise NumericalConsistencyError(f"probability has imaginary part {p.imag:.3e}")
    return float(p.real)


def event_probabilities(stacks: Sequence[np.ndarray], w: ProcessMatrix) -> np.ndarray:
    """Probabilities for every combination of candidate events.

    ``stacks[X]`` has shape ``(m_X, d_X, d_X)``; the result has shape
    ``(m_A, m_B, ...)`` with entry ``tr[(M_a (x) M_b (x) ...) W]`` (complex).
    """
    dims = w.region_dims
    if len(stacks) != len(dims):
        raise DimensionError(f"{len(stacks)} event stacks for {len(dims)} regions")
    n = len(dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    batch, rows, cols = letters[:n], letters[n : 2 * n], letters[2 * n : 3 * n]
    operands, subs = [], []
    for x, s in enumerate(stacks):
        s = np.asarray(s, dtype=complex)
        if s.ndim != 3 or s.shape[1:] != (dims[x], dims[x]):
            raise DimensionError(f"event stack {x} has shape {s.shape}, region dim {dims[x]}")
        operands.append(s)
        subs.append(batch[x] + rows[x] + cols[x])
    operands.append(w.matrix.reshape(dims + dims))
    subs.append(cols + rows)
    expr = ",".join(subs) + "->" + batch
    return np.einsum(expr, *operands, optimize=True)


# --- CPTP families -----------------------------------------------------------


def informationally_complete_states(d: int) -> list[np.ndarray]:
    """``d*d`` pure states whose projectors span the Hermitian matrices on ``C^d``."""
    basis = np.eye(d, dtype=complex)
    states = [np.outer(basis[i], basis[i]) for i in range(d)]
    for i, j in itertools.combinations(range(d), 2):
        for phase in (1, 1j):
            v = (basis[i] + phase * basis[j]) / np.sqrt(2)
            states.append(np.outer(v, v.conj()))
    return states


def weyl_operators(d: int) -> list[np.ndarray]:
    """Clock-and-shift unitaries ``X^a Z^b``; the Paulis (up to phase) for ``d = 2``."""
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    clock = np.diag(omega ** np.arange(d))
    return [
        np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
        for a in range(d)
        for b in range(d)
    ]


def cptp_spanning_family(dim_in: int, dim_out: int) -> np.ndarray:
    """Choi matrices of CPTP maps whose affine hull is that of all CPTP maps.

    Contains replacement channels ``rho -> tr(rho) sigma``, two-outcome
    measure-and-prepare channels and, for equal dimensions, Weyl unitary
    channels. Returned as an array of shape ``(m, d, d)``.
    """
    ins, outs = informationally_complete_states(dim_in), informationally_complete_states(dim_out)
    eye_in = np.eye(dim_in)
    chois = [np.kron(eye_in, s) for s in outs]
    if dim_in > 1:
        ref = outs[0]
        for p in ins:
            for s in outs:
                chois.append(np.kron(p.T, s) + np.kron((eye_in - p).T, ref))
    if dim_in == dim_out:
        chois.extend(choi_from_kraus([u]) for u in weyl_operators(dim_in))
    return np.array(chois)


def random_kraus(dim_in: int, dim_out: int, rng: np.random.Generator, n_kraus: int | None = None):
    """Kraus operators of a random CPTP map from a random Stinespring isometry."""
    if n_kraus is None:
        n_kraus = dim_in * dim_out
    env = max(n_kraus, -(-dim_in // dim_out))
    v = linalg.random_unitary(dim_out * env, rng)[:, :dim_in]
    v = v.reshape(dim_out, env, dim_in)
    return [v[:, k, :] for k in range(env)]


def random_cptp(dim_in: int, dim_out: int, rng: np.random.Generator, tol: float = DEFAULT_TOL) -> CpMap:
    return CpMap(choi_from_kraus(random_kraus(dim_in, dim_out, rng)), dim_in, dim_out, tol)


def random_instrument(
    dim_in: int, dim_out: int, n_outcomes: int, rng: np.random.Generator, tol: float = DEFAULT_TOL
) -> Instrument:
    """Random instrument: Kraus operators of a random channel grouped into outcomes."""
    kraus = random_kraus(dim_in, dim_out, rng, n_kraus=max(n_outcomes, dim_in * dim_out))
    labels = np.concatenate([np.arange(n_outcomes), rng.integers(0, n_outcomes, len(kraus) - n_outcomes)])
    rng.shuffle(labels)
    events = [
        CpMap(choi_from_kraus([k for k, lab in zip(kraus, labels) if lab == o]), dim_in, dim_out, tol)
        for o in range(n_outcomes)
    ]
    return Instrument(tuple(events), tol)


# --- validity ----------------------------------------------------------------


@dataclass
class ProcessValidationReport:
    psd: bool
    spanning_checks: int
    random_checks: int
    max_spanning_residual: float
    max_random_residual: float
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.max_spanning_residual, self.max_random_residual)

    @property
    def passed(self) -> bool:
        return self.psd and self.max_residual < self.tol

    def to_dict(self) -> dict:
        return {
            "psd": self.psd,
            "spanning_checks": self.spanning_checks,
            "random_checks": self.random_checks,
            "max_spanning_residual": self.max_spanning_residual,
            "max_random_residual": self.max_random_residual,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "passed": self.passed,
        }


def validate_process(
    w: ProcessMatrix, samples: int = 20, tol: float = DEFAULT_TOL, seed: int = 0
) -> ProcessValidationReport:
    """Check that ``w`` gives probability one to every tuple of CPTP maps.

    By multilinearity, unit probability on all tuples drawn from
    :func:`cptp_spanning_family` implies it for every CPTP tuple; the random
    samples are an independent spot check.
    """
    psd = linalg.is_psd(w.matrix, tol)
    stacks = [cptp_spanning_family(r.dim_in, r.dim_out) for r in w.regions]
    probs = event_probabilities(stacks, w)
    span_res = float(np.max(np.abs(probs - 1.0)))

    rng = np.random.default_rng(seed)
    rand_res = 0.0
    for _ in range(samples):
        events = [random_cptp(r.dim_in, r.dim_out, rng) for r in w.regions]
        p = np.trace(linalg.kron(*(e.choi for e in events), np.eye(1)) @ w.matrix)
        rand_res = max(rand_res, abs(p - 1.0))
    return ProcessValidationReport(psd, probs.size, samples, span_res, float(rand_res), tol)


# --- ontological-model candidates -------------------------------------------


@dataclass(eq=False)
class OnticModelCandidate:
    """Finite ontic-process space with frame functions ``tr[sigma(w) M]``.

    The distribution ``g_W`` over ontic processes is either linear,
    ``g_W(w) = tr[eta(w) W]`` (``etas`` given), or an arbitrary callable
    ``response(W) -> weights`` for process-contextual models.
    """

    sigmas: list[ProcessMatrix]
    etas: list[np.ndarray] | None = None
    response: Callable[[ProcessMatrix], np.ndarray] | None = None

    def __post_init__(self):
        if not self.sigmas:
            raise ValidationError("ontic space is empty")
        regions = self.sigmas[0].regions
        if any(s.regions != regions for s in self.sigmas):
            raise DimensionError("ontic processes live on different regions")
        if (self.etas is None) == (self.response is None):
            raise ValidationError("give exactly one of etas or response")
        if self.etas is not None:
            self.etas = [linalg.as_matrix(e) for e in self.etas]
            if len(self.etas) != len(self.sigmas):
                raise ValidationError("need one eta per ontic process")
            d = self.sigmas[0].matrix.shape[0]
            if any(e.shape != (d, d) for e in self.etas):
                raise DimensionError("eta operators do not match the process space")

    @property
    def regions(self) -> tuple[RegionSpec, ...]:
        return self.sigmas[0].regions

    def g(self, w: ProcessMatrix) -> np.ndarray:
        """Distribution over the ontic processes induced by ``w``."""
        if w.regions != self.regions:
            raise DimensionError("process does not live on the model's regions")
        if self.etas is not None:
            return np.array([np.trace(e @ w.matrix).real for e in self.etas])
        return np.asarray(self.response(w), dtype=float)

    def frame(self, events: Sequence[CpMap]) -> np.ndarray:
        """``f_w(M) = tr[sigma(w) M]`` for every ontic process ``w``."""
        return np.array([born_probability(events, s) for s in self.sigmas])

    def probability(self, events: Sequence[CpMap], weights) -> float:
        """Predicted probability of ``events`` for a given distribution over ontic processes."""
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(self.sigmas),):
            raise DimensionError("one weight per ontic process expected")
        return float(self.frame(events) @ weights)

    def predict(self, events: Sequence[CpMap], w: ProcessMatrix) -> float:
        return self.probability(events, self.g(w))


def check_eta_instrument(
    candidate: OnticModelCandidate, test_processes: Sequence[ProcessMatrix], tol: float = DEFAULT_TOL
) -> bool:
    """Positivity and normalisation of ``g_W`` for each test process.

    For linear candidates every ``eta`` must be PSD and ``sum_w tr[eta(w) W]``
    must equal one. Candidates given by a response function are checked for
    nonnegative weights summing to one.
    """
    if candidate.etas is not None and not all(linalg.is_psd(e, tol) for e in candidate.etas):
        return False
    for w in test_processes:
        g = candidate.g(w)
        if g.min(initial=0.0) < -tol or abs(g.sum() - 1.0) >= tol:
            return False
    return True


def crude_model(processes: Sequence[ProcessMatrix], tol: float = DEFAULT_TOL) -> OnticModelCandidate:
    """Ontic process identified with the quantum process: ``g_W(w) = delta(W - w)``.

    The response is the indicator of the matching process (all zeros for a
    process outside the finite ontic space). Mixtures are queried through
    :meth:`OnticModelCandidate.probability` with explicit weights.
    """
    processes = list(processes)
    for (i, a), (j, b) in itertools.combinations(enumerate(processes), 2):
        if a.regions == b.regions and linalg.frobenius_distance(a.matrix, b.matrix) <= tol:
            raise ValidationError(f"processes {i} and {j} coincide")

    def response(w: ProcessMatrix) -> np.ndarray:
        return np.array(
            [float(linalg.frobenius_distance(w.matrix, s.matrix) <= tol) for s in processes]
        )

    return OnticModelCandidate(sigmas=processes, response=response)


# --- JSON --------------------------------------------------------------------


def cpmap_to_json(m: CpMap) -> dict:
    return {"dim_in": m.dim_in, "dim_out": m.dim_out, "choi": linalg.matrix_to_json(m.choi)}


def cpmap_from_json(obj, tol: float = DEFAULT_TOL) -> CpMap:
    try:
        return CpMap(linalg.matrix_from_json(obj["choi"]), int(obj["dim_in"]), int(obj["dim_out"]), tol)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed CP map object: {exc}") from exc


def instrument_to_json(ins: Instrument) -> dict:
    return {"events": [cpmap_to_json(e) for e in ins.events]}


def instrument_from_json(obj, tol: float = DEFAULT_TOL) -> Instrument:
    try:
        return Instrument(tuple(cpmap_from_json(e, tol) for e in obj["events"]), tol)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed instrument object: {exc}") from exc


def process_to_json(w: ProcessMatrix) -> dict:
    return {
        "regions": [{"label": r.label, "dim_in": r.dim_in, "dim_out": r.dim_out} for r in w.regions],
        "matrix": linalg.matrix_to_json(w.matrix),
    }


def process_from_json(obj, tol: float = DEFAULT_TOL) -> ProcessMatrix:
    try:
        regions = tuple(
            RegionSpec(str(r["label"]), int(r["dim_in"]), int(r["dim_out"])) for r in obj["regions"]
        )
        return ProcessMatrix(regions, linalg.matrix_from_json(obj["matrix"]), tol)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed process object: {exc}") from exc
