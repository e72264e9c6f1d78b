"""Machine check of the no-go argument for non-contextual ontic processes.

A process ``W`` with two convex decompositions into extremal processes,
``W = sum_j q_j W_j = sum_k p_k W'_k``, forces every ontic process in the
support of ``g_W`` to be proportional to some ``W_j`` and some ``W'_k``. If no
``W_j`` is proportional to any ``W'_k`` no process non-contextual model exists.

The example used throughout is a qubit channel from ``A_O`` to ``B_I`` built
from the unitary-channel processes ``Proj[V] = sum_rs |r><s| (x) V|r><s|V^dag``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import linalg, simplex
from .errors import DimensionError, NumericalConsistencyError, ValidationError
from .linalg import DEFAULT_TOL
from .quantum import OnticModelCandidate, ProcessMatrix, RegionSpec, choi_from_kraus, convex_mix

SUPPORT_TOL = 1e-8
MIX_TOL = 1e-10

NAMED_UNITARIES = {
    "identity": linalg.I2,
    "x": linalg.X,
    "y": linalg.Y,
    "z": linalg.Z,
    "hadamard": linalg.HADAMARD,
}

CHANNEL_REGIONS = (RegionSpec("A", 1, 2), RegionSpec("B", 2, 1))


@dataclass
class Decomposition:
    weights: list[float]
    parts: list[ProcessMatrix]

    def __post_init__(self):
        if len(self.weights) != len(self.parts) or not self.parts:
            raise ValidationError("need one weight per part")
        if min(self.weights) < 0 or abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValidationError("weights must be a probability vector")

    def mix(self) -> ProcessMatrix:
        return convex_mix(self.parts, self.weights)

    def reproduces(self, target: ProcessMatrix, tol: float = MIX_TOL) -> bool:
        return linalg.frobenius_distance(self.mix().matrix, target.matrix) <= tol


@dataclass
class ContradictionWitness:
    target: ProcessMatrix
    decomposition_a: Decomposition
    decomposition_b: Decomposition
    proportional_pairs: list[tuple[int, int, complex]] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return (
            not self.proportional_pairs
            and self.decomposition_a.reproduces(self.target)
            and self.decomposition_b.reproduces(self.target)
        )


def proj(v) -> np.ndarray:
    """``Proj[V]``: the Choi matrix of the unitary channel ``V``."""
    v = linalg.as_matrix(v)
    if not linalg.is_unitary(v):
        raise ValidationError("matrix is not unitary")
    return choi_from_kraus([v])


def unit_identity_expansion(m) -> dict[str, float]:
    """Pauli coefficients of ``m`` rescaled so the identity coefficient is one."""
    coeffs = linalg.pauli_coefficients(m)
    norm = coeffs["II"]
    if abs(norm) < 1e-15:
        raise NumericalConsistencyError("identity coefficient vanishes")
    return {k: v / norm for k, v in coeffs.items()}


def _channel_part(v) -> ProcessMatrix:
    part = ProcessMatrix(CHANNEL_REGIONS, proj(v))
    # rank-1 Choi matrices of unitaries are extremal
    assert np.linalg.matrix_rank(part.matrix, tol=1e-9) == 1
    return part


def build_pauli_decompositions(u) -> tuple[Decomposition, Decomposition]:
    """Uniform mixtures of ``Proj[P]`` and of ``Proj[U P]`` for ``P`` in ``1, X, Y, Z``."""
    u = linalg.as_matrix(u)
    if u.shape != (2, 2) or not linalg.is_unitary(u):
        raise ValidationError("need a 2x2 unitary")
    paulis = [linalg.I2, linalg.X, linalg.Y, linalg.Z]
    quarter = [0.25] * 4
    a = Decomposition(quarter, [_channel_part(p) for p in paulis])
    b = Decomposition(quarter, [_channel_part(u @ p) for p in paulis])
    return a, b


def proportional_pairs(
    a: Decomposition, b: Decomposition, tol: float = DEFAULT_TOL
) -> list[tuple[int, int, complex]]:
    pairs = []
    for (j, wj), (k, wk) in itertools.product(enumerate(a.parts), enumerate(b.parts)):
        c = linalg.proportionality(wj.matrix, wk.matrix, tol)
        if c is not None:
            pairs.append((j, k, c))
    return pairs


def find_contradiction(u, tol: float = DEFAULT_TOL) -> ContradictionWitness:
    a, b = build_pauli_decompositions(u)
    target = a.mix()
    if not b.reproduces(target):
        raise NumericalConsistencyError("the two decompositions mix to different processes")
    return ContradictionWitness(target, a, b, proportional_pairs(a, b, tol))


def lp_decompose(
    target: ProcessMatrix, dictionary: list[ProcessMatrix], tol: float = DEFAULT_TOL
) -> np.ndarray | None:
    """Nonnegative weights ``g`` with ``sum_w g_w sigma(w) == target``, or ``None``.

    Solved as a phase-I linear program over the real coordinates of the
    Hermitian operator space. Returned weights always reconstruct ``target``
    within ``tol`` (relative Frobenius distance).
    """
    if not dictionary:
        raise ValidationError("empty dictionary")
    for s in dictionary:
        if s.matrix.shape != target.matrix.shape:
            raise DimensionError("dictionary element does not match the target's space")
    cols = np.array([linalg.hermitian_to_real(s.matrix) for s in dictionary]).T
    rhs = linalg.hermitian_to_real(target.matrix)
    g = simplex.nonnegative_solution(cols, rhs, tol)
    if g is None:
        return None
    recon = sum(gi * s.matrix for gi, s in zip(g, dictionary))
    scale = max(1.0, float(np.linalg.norm(target.matrix)))
    if linalg.frobenius_distance(recon, target.matrix) > tol * scale:
        return None
    return g


@dataclass
class SupportReport:
    """Outcome of :func:`support_partition_check`.

    ``verdict`` is ``"model-failure"`` when some process cannot be expressed
    over the candidate's ontic processes, ``"contradiction"`` when the
    support argument finds violations, and ``"consistent"`` otherwise.
    """

    unrepresentable: list[str]
    supports: dict[str, list[int]]
    union_mismatch: list[str]
    violations: list[dict]
    g_mismatch: float | None

    @property
    def model_failure(self) -> bool:
        return bool(self.unrepresentable)

    @property
    def verdict(self) -> str:
        if self.unrepresentable:
            return "model-failure"
        if self.violations or self.union_mismatch:
            return "contradiction"
        return "consistent"

    @property
    def refuted(self) -> bool:
        return self.verdict != "consistent"

    def to_dict(self) -> dict:
        return {
            "unrepresentable": self.unrepresentable,
            "supports": self.supports,
            "union_mismatch": self.union_mismatch,
            "violations": self.violations,
            "g_mismatch": self.g_mismatch,
            "verdict": self.verdict,
        }


def support_partition_check(
    witness: ContradictionWitness,
    candidate: OnticModelCandidate,
    tol: float = SUPPORT_TOL,
    lp_tol: float = DEFAULT_TOL,
) -> SupportReport:
    """Run the support-partition argument against a finite candidate model.

    ``g`` for each process comes from the candidate's ``etas`` when it has
    them, otherwise from :func:`lp_decompose` against its ``sigma``
    dictionary. An ontic process ``w`` in the support of ``g_W`` is a
    violation when no pair ``W_j``, ``W'_k`` with ``sigma(w) ~ W_j ~ W'_k``
    exists.
    """
    if candidate.regions != witness.target.regions:
        raise DimensionError("candidate and witness live on different regions")
    a, b = witness.decomposition_a, witness.decomposition_b
    named = {"W": witness.target}
    named.update({f"A{j + 1}": p for j, p in enumerate(a.parts)})
    named.update({f"B{k + 1}": p for k, p in enumerate(b.parts)})

    g, unrepresentable = {}, []
    for name, w in named.items():
        if candidate.etas is not None:
            g[name] = candidate.g(w)
        else:
            sol = lp_decompose(w, candidate.sigmas, lp_tol)
            if sol is None:
                unrepresentable.append(name)
            else:
                g[name] = sol
    supports = {name: [int(i) for i in np.flatnonzero(v > tol)] for name, v in g.items()}

    union_mismatch = []
    g_mismatch = None
    if not unrepresentable:
        omega_w = set(supports["W"])
        for label, dec in (("A", a), ("B", b)):
            union = set().union(*(supports[f"{label}{i + 1}"] for i in range(len(dec.parts))))
            if union != omega_w:
                union_mismatch.append(label)
        # process non-contextuality: g_W must equal both mixtures of the parts' g
        ga = sum(q * g[f"A{j + 1}"] for j, q in enumerate(a.weights))
        gb = sum(p * g[f"B{k + 1}"] for k, p in enumerate(b.weights))
        g_mismatch = float(max(np.abs(ga - g["W"]).max(), np.abs(gb - g["W"]).max()))

    violations = []
    for w_idx in supports.get("W", []):
        sigma = candidate.sigmas[w_idx].matrix
        like_a = [j for j, p in enumerate(a.parts) if linalg.proportionality(sigma, p.matrix, lp_tol) is not None]
        like_b = [k for k, p in enumerate(b.parts) if linalg.proportionality(sigma, p.matrix, lp_tol) is not None]
        compatible = [
            (j, k)
            for j, k in itertools.product(like_a, like_b)
            if linalg.proportionality(a.parts[j].matrix, b.parts[k].matrix, lp_tol) is not None
        ]
        if not compatible:
            violations.append({"omega": w_idx, "proportional_a": like_a, "proportional_b": like_b})
    return SupportReport(unrepresentable, supports, union_mismatch, violations, g_mismatch)
