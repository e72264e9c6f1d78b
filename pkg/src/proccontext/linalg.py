"""Dense complex-matrix helpers shared by the quantum modules.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Every
multipartite operator uses one factor ordering: regions sorted by label, and
within a region the input factor precedes the output factor
(``A_I, A_O, B_I, B_O, ...``).
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, ValidationError

DEFAULT_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a 2-d complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {arr.shape}")
    return arr


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {m.shape}")


def kron(a, b, *more) -> np.ndarray:
    """Kronecker product of two or more matrices, left factor outermost."""
    return reduce(np.kron, (as_matrix(x) for x in (a, b, *more)))


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T


def is_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    m = as_matrix(m)
    _require_square(m)
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def is_psd(m, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``m`` is Hermitian within ``tol`` and has no eigenvalue below ``-tol``."""
    m = as_matrix(m)
    _require_square(m)
    if not is_hermitian(m, tol):
        return False
    evals = np.linalg.eigvalsh((m + m.conj().T) / 2)
    return bool(evals.min() >= -tol)


def is_unitary(u, tol: float = DEFAULT_TOL) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) <= tol)


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> None:
    _require_square(m)
    if any(int(d) < 1 for d in dims):
        raise DimensionError(f"factor dimensions must be positive, got {list(dims)}")
    if int(np.prod(dims)) != m.shape[0]:
        raise DimensionError(
            f"factor dimensions {list(dims)} do not match matrix of size {m.shape[0]}"
        )


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every tensor factor whose index is not in ``keep``.

    Kept factors stay in their original relative order. Tracing out all
    factors returns the full trace as a 1x1 matrix.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_dims(m, dims)
    keep = sorted(set(keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} factors")

    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise DimensionError("too many tensor factors")
    rows = list(letters[:n])
    cols = [rows[i] if i not in keep else letters[n + i] for i in range(n)]
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    t = m.reshape(dims + dims)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    kdim = int(np.prod([dims[i] for i in keep])) if keep else 1
    return reduced.reshape(kdim, kdim)


def permute_factors(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new factor ``i`` is old factor ``perm[i]``."""
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_dims(m, dims)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise DimensionError(f"{list(perm)} is not a permutation of {n} factors")
    t = m.reshape(dims + dims)
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(m.shape)


def proportionality(a, b, tol: float = DEFAULT_TOL) -> complex | None:
    """Return ``c`` with ``a == c * b`` or ``None`` if no such scalar exists.

    ``c`` is the least-squares coefficient; it is accepted when the residual
    ``||a - c b||_F`` is at most ``tol`` times ``||a||_F``. By convention two
    zero matrices are proportional with ``c = 1``; a nonzero ``a`` against a
    zero ``b`` gives ``None``.
    """
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if nb == 0.0:
        return complex(1.0) if na == 0.0 else None
    c = np.vdot(b, a) / np.vdot(b, b)
    if na == 0.0:
        return complex(0.0)
    if np.linalg.norm(a - c * b) <= tol * na:
        return complex(c)
    return None


def frobenius_distance(a, b) -> float:
    return float(np.linalg.norm(as_matrix(a) - as_matrix(b)))


def pauli_coefficients(m) -> dict[str, float]:
    """Real coefficients ``c_PQ`` of a Hermitian 4x4 matrix in ``sum c_PQ P(x)Q``."""
    m = as_matrix(m)
    if m.shape != (4, 4):
        raise DimensionError("Pauli expansion is defined here for 4x4 matrices only")
    coeffs = {}
    for p, pm in PAULIS.items():
        for q, qm in PAULIS.items():
            coeffs[p + q] = float(np.real(np.trace(np.kron(pm, qm) @ m)) / 4)
    return coeffs


def hermitian_to_real(m) -> np.ndarray:
    """Linear isometric embedding of a Hermitian matrix into ``R^(d*d)``.

    Diagonal entries are kept; each strictly-upper entry contributes its real
    and imaginary parts scaled by ``sqrt(2)``.
    """
    m = as_matrix(m)
    _require_square(m)
    iu = np.triu_indices(m.shape[0], k=1)
    upper = m[iu]
    return np.concatenate(
        [np.real(np.diag(m)), np.sqrt(2) * upper.real, np.sqrt(2) * upper.imag]
    )


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


# JSON schema: {"rows": n, "cols": m, "entries": [[re, im], ...]} row-major.


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1:
        raise ValidationError("matrix dimensions must be positive")
    if len(entries) != rows * cols:
        raise DimensionError(f"expected {rows * cols} entries, got {len(entries)}")
    try:
        flat = [complex(float(re), float(im)) for re, im in entries]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix entry: {exc}") from exc
    return np.array(flat, dtype=complex).reshape(rows, cols)
