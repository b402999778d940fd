# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled quadrature kernels: trig-polynomial evaluation and pairwise sums.

Mirrors the NumPy fallback in ``_pykernels``; the reduction tree uses the
same block size so both backends are bit-stable run to run.
"""

import numpy as np

cimport numpy as cnp

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)

cnp.import_array()

DEF BLOCK = 1024


cdef double complex _block_sum(const double complex *v, Py_ssize_t n) nogil:
    cdef double complex acc = 0
    cdef Py_ssize_t i
    cdef Py_ssize_t half
    if n <= BLOCK:
        for i in range(n):
            acc = acc + v[i]
        return acc
    half = n // (2 * BLOCK)
    if half < 1:
        half = 1
    half = half * BLOCK
    return _block_sum(v, half) + _block_sum(v + half, n - half)


def pairwise_sum(values):
    """Sum a 1-d array with a fixed pairwise reduction order."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] v = np.ascontiguousarray(
        values, dtype=np.complex128)
    if v.shape[0] == 0:
        return 0j
    return complex(_block_sum(<double complex *> v.data, v.shape[0]))


def pairwise_dot(weights, values):
    """Weighted sum ``sum(weights * values)`` with pairwise reduction."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(
        weights, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] v = np.ascontiguousarray(
        values, dtype=np.complex128)
    if w.shape[0] != v.shape[0]:
        raise ValueError("weights and values must have matching shapes")
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] prod = np.empty(
        w.shape[0], dtype=np.complex128)
    cdef Py_ssize_t i
    for i in range(w.shape[0]):
        prod[i] = w[i] * v[i]
    if prod.shape[0] == 0:
        return 0j
    return complex(_block_sum(<double complex *> prod.data, prod.shape[0]))


def trig_eval(freqs, coeffs, pts):
    """Evaluate ``sum_k c_k * exp(2*pi*i * <k, x>)`` at each point."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] f = np.ascontiguousarray(
        freqs, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] c = np.ascontiguousarray(
        coeffs, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.ascontiguousarray(
        pts, dtype=np.float64)
    cdef Py_ssize_t K = f.shape[0]
    cdef Py_ssize_t N = f.shape[1]
    cdef Py_ssize_t M = x.shape[0]
    if x.shape[1] != N:
        raise ValueError("frequency and point dimensions differ")
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(
        M, dtype=np.complex128)
    cdef double tau = 2.0 * np.pi
    cdef double phase
    cdef double complex acc
    cdef Py_ssize_t i, k, j
    with nogil:
        for i in range(M):
            acc = 0
            for k in range(K):
                phase = 0.0
                for j in range(N):
                    phase += f[k, j] * x[i, j]
                acc = acc + c[k] * cexp(1j * tau * phase)
            out[i] = acc
    return out
