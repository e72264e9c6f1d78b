"""Dense phase-I simplex for small feasibility problems ``A x = b, x >= 0``."""

from __future__ import annotations

import numpy as np

PIVOT_EPS = 1e-12


def nonnegative_solution(a, b, tol: float = 1e-9, max_iter: int = 10_000) -> np.ndarray | None:
    """Return some ``x >= 0`` with ``a @ x == b`` or ``None`` if none exists.

    Minimises the sum of artificial variables with Bland's rule, so it
    terminates on degenerate problems. Feasibility is declared when the phase-I
    optimum is at most ``tol`` (relative to the scale of ``b``).
    """
    a = np.array(a, dtype=float, copy=True)
    b = np.array(b, dtype=float, copy=True)
    if a.ndim != 2 or b.shape != (a.shape[0],):
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    m, n = a.shape
    neg = b < 0
    a[neg] *= -1
    b[neg] *= -1
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))

    # tableau rows: constraints, then the phase-I cost row
    t = np.zeros((m + 1, n + m + 1))
    t[:m, :n] = a
    t[:m, n : n + m] = np.eye(m)
    t[:m, -1] = b
    t[m, :n] = -a.sum(axis=0)
    t[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    for _ in range(max_iter):
        cost = t[m, : n + m]
        entering = next((j for j in range(n + m) if cost[j] < -PIVOT_EPS * scale), None)
        if entering is None:
            break
        col = t[:m, entering]
        rows = [i for i in range(m) if col[i] > PIVOT_EPS]
        if not rows:
            # unbounded direction cannot occur in phase I; treat as numerical noise
            t[m, entering] = 0.0
            continue
        ratios = [(t[i, -1] / col[i], basis[i], i) for i in rows]
        best = min(r[0] for r in ratios)
        leave = min((r for r in ratios if r[0] <= best + PIVOT_EPS), key=lambda r: r[1])[2]
        t[leave] /= t[leave, entering]
        for i in range(m + 1):
            if i != leave and t[i, entering] != 0.0:
                t[i] -= t[i, entering] * t[leave]
        basis[leave] = entering
    else:
        raise RuntimeError("simplex did not converge")

    if -t[m, -1] > tol * scale:
        return None
    x = np.zeros(n)
    for i, j in enumerate(basis):
        if j < n:
            x[j] = max(t[i, -1], 0.0)
    return x
