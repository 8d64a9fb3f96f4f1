# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: in-place gate application and categorical sampling."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def apply_1q(double complex[::1] psi, double complex[:, ::1] g, int q):
    """Apply a 2x2 gate to qubit ``q`` of ``psi`` in place (little-endian)."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i, j
    cdef double complex a0, a1
    cdef double complex g00 = g[0, 0], g01 = g[0, 1], g10 = g[1, 0], g11 = g[1, 1]
    for i in range(0, dim, 2 * stride):
        for j in range(i, i + stride):
            a0 = psi[j]
            a1 = psi[j + stride]
            psi[j] = g00 * a0 + g01 * a1
            psi[j + stride] = g10 * a0 + g11 * a1


def apply_2q(double complex[::1] psi, double complex[:, ::1] g, int q0, int q1):
    """Apply a 4x4 gate in place; local index is bit(q0) + 2*bit(q1)."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t m0 = (<Py_ssize_t>1) << q0
    cdef Py_ssize_t m1 = (<Py_ssize_t>1) << q1
    cdef Py_ssize_t base, r, c
    cdef Py_ssize_t idx[4]
    cdef double complex amp[4]
    cdef double complex acc
    for base in range(dim):
        if base & m0 or base & m1:
            continue
        idx[0] = base
        idx[1] = base | m0
        idx[2] = base | m1
        idx[3] = base | m0 | m1
        for r in range(4):
            amp[r] = psi[idx[r]]
        for r in range(4):
            acc = 0
            for c in range(4):
                acc = acc + g[r, c] * amp[c]
            psi[idx[r]] = acc


def sample_categorical(double[::1] cdf, double[::1] uniforms):
    """Index of the first cdf entry exceeding each uniform draw."""
    cdef Py_ssize_t n = uniforms.shape[0]
    cdef Py_ssize_t k = cdf.shape[0]
    cdef Py_ssize_t i, lo, hi, mid
    cdef double u
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] o = out
    for i in range(n):
        u = uniforms[i] * cdf[k - 1]
        lo = 0
        hi = k - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cdf[mid] > u:
                hi = mid
            else:
                lo = mid + 1
        o[i] = lo
    return out


def bernoulli_counts(double[::1] probs, double[::1] uniforms, Py_ssize_t block):
    """Per block of ``block`` trials, count draws with uniform < prob."""
    cdef Py_ssize_t n = uniforms.shape[0]
    cdef Py_ssize_t nb = n // block
    cdef Py_ssize_t b, i
    cdef long long cnt
    out = np.zeros(nb, dtype=np.int64)
    cdef long long[::1] o = out
    for b in range(nb):
        cnt = 0
        for i in range(b * block, (b + 1) * block):
            if uniforms[i] < probs[i]:
                cnt += 1
        o[b] = cnt
    return out
