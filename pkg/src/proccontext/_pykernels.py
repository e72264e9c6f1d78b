"""Pure-Python kernels; same signatures and semantics as the compiled ``_kernels``."""

from __future__ import annotations

import itertools

import numpy as np


def _op_tables(k_in: int, k_out: int) -> list[tuple[int, ...]]:
    # function index phi maps input i to digit i of phi in base k_out
    return [
        tuple((phi // k_out**i) % k_out for i in range(k_in)) for phi in range(k_out**k_in)
    ]


def _strides(radices) -> list[int]:
    strides, acc = [0] * len(radices), 1
    for x in range(len(radices) - 1, -1, -1):
        strides[x] = acc
        acc *= int(radices[x])
    return strides


def process_valid(wfull: np.ndarray, k_in: np.ndarray, k_out: np.ndarray) -> bool:
    """True iff every tuple of local functions has exactly one fixed point.

    ``wfull[X, o]`` is region ``X``'s input for the joint output index ``o``
    (mixed radix over ``k_out``, first region most significant).
    """
    n = len(k_in)
    wrows = [list(map(int, wfull[x])) for x in range(n)]
    ostride = _strides(k_out)
    ops = [_op_tables(int(k_in[x]), int(k_out[x])) for x in range(n)]
    inputs = list(itertools.product(*(range(int(k)) for k in k_in)))
    for fs in itertools.product(*ops):
        count = 0
        for lam in inputs:
            o = 0
            for x in range(n):
                o += fs[x][lam[x]] * ostride[x]
            if all(wrows[x][o] == lam[x] for x in range(n)):
                count += 1
                if count > 1:
                    return False
        if count != 1:
            return False
    return True


def omega_mediation(
    fvals: np.ndarray, offsets: np.ndarray, cfg_index: np.ndarray, n_configs: int
) -> np.ndarray:
    """Ontic-model marginal ``sum_a P(lambda | I, a) P(a)`` per configuration.

    Choice ``x`` owns the slice ``offsets[x]:offsets[x+1]`` of ``fvals``
    (frame values) and ``cfg_index`` (global configuration index). An
    assignment picks one entry per choice; its weight is the product of the
    picked frame values and it contributes ``delta(lambda, a_x)`` for each
    ``x``.
    """
    n_choices = len(offsets) - 1
    slices = [
        list(zip(fvals[offsets[x] : offsets[x + 1]].tolist(), cfg_index[offsets[x] : offsets[x + 1]].tolist()))
        for x in range(n_choices)
    ]
    out = [0.0] * n_configs
    for picks in itertools.product(*slices):
        p = 1.0
        for f, _ in picks:
            p *= f
        for _, c in picks:
            out[c] += p
    return np.array(out)
