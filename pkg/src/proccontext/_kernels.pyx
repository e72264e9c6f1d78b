# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; semantics identical to ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64


def process_valid(wfull, k_in, k_out):
    cdef i64[:, ::1] w = np.ascontiguousarray(wfull, dtype=np.int64)
    cdef i64[::1] kin = np.ascontiguousarray(k_in, dtype=np.int64)
    cdef i64[::1] kout = np.ascontiguousarray(k_out, dtype=np.int64)
    cdef Py_ssize_t n = kin.shape[0]
    cdef Py_ssize_t x, i
    cdef i64 acc, o, count, n_ops, n_inputs, op, inp, rem, lam, max_kin = 1

    for x in range(n):
        if kin[x] > max_kin:
            max_kin = kin[x]

    cdef i64[::1] ostride = np.zeros(n, dtype=np.int64)
    cdef i64[::1] nf = np.zeros(n, dtype=np.int64)
    acc = 1
    for x in range(n - 1, -1, -1):
        ostride[x] = acc
        acc *= kout[x]
    n_ops = 1
    n_inputs = 1
    for x in range(n):
        nf[x] = kout[x] ** kin[x]
        n_ops *= nf[x]
        n_inputs *= kin[x]

    # optab[x, phi, i]: output of function phi of region x on input i
    cdef i64 max_nf = 1
    for x in range(n):
        if nf[x] > max_nf:
            max_nf = nf[x]
    cdef i64[:, :, ::1] optab = np.zeros((n, max_nf, max_kin), dtype=np.int64)
    cdef i64 phi
    for x in range(n):
        for phi in range(nf[x]):
            rem = phi
            for i in range(kin[x]):
                optab[x, phi, i] = rem % kout[x]
                rem //= kout[x]

    cdef i64[::1] fsel = np.zeros(n, dtype=np.int64)
    cdef i64[::1] lamv = np.zeros(n, dtype=np.int64)
    cdef bint ok
    for op in range(n_ops):
        rem = op
        for x in range(n - 1, -1, -1):
            fsel[x] = rem % nf[x]
            rem //= nf[x]
        count = 0
        for inp in range(n_inputs):
            rem = inp
            for x in range(n - 1, -1, -1):
                lamv[x] = rem % kin[x]
                rem //= kin[x]
            o = 0
            for x in range(n):
                o += optab[x, fsel[x], lamv[x]] * ostride[x]
            ok = True
            for x in range(n):
                if w[x, o] != lamv[x]:
                    ok = False
                    break
            if ok:
                count += 1
                if count > 1:
                    return False
        if count != 1:
            return False
    return True


def omega_mediation(fvals, offsets, cfg_index, Py_ssize_t n_configs):
    cdef double[::1] f = np.ascontiguousarray(fvals, dtype=np.float64)
    cdef i64[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef i64[::1] cidx = np.ascontiguousarray(cfg_index, dtype=np.int64)
    cdef Py_ssize_t n_choices = off.shape[0] - 1
    cdef Py_ssize_t x
    cdef i64 total = 1, t
    for x in range(n_choices):
        total *= off[x + 1] - off[x]

    out_arr = np.zeros(n_configs, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef i64[::1] digit = np.zeros(n_choices, dtype=np.int64)
    cdef double p
    for t in range(total):
        p = 1.0
        for x in range(n_choices):
            p *= f[off[x] + digit[x]]
        for x in range(n_choices):
            out[cidx[off[x] + digit[x]]] += p
        # odometer increment, last choice fastest
        x = n_choices - 1
        while x >= 0:
            digit[x] += 1
            if digit[x] < off[x + 1] - off[x]:
                break
            digit[x] = 0
            x -= 1
    return out_arr
