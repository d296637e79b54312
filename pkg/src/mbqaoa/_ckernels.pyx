# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


def z_diagonal(masks, coeffs, int n_qubits):
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n_qubits
    cdef uint64_t[::1] m = np.ascontiguousarray(masks, dtype=np.uint64)
    cdef double[::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    out = np.zeros(size, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, t, h, blk, nt = m.shape[0]
    cdef double a, b
    with nogil:
        if nt <= n_qubits:
            for t in range(nt):
                for i in range(size):
                    if __builtin_popcountll(m[t] & <uint64_t>i) & 1:
                        o[i] -= c[t]
                    else:
                        o[i] += c[t]
        else:
            # scatter coefficients, then an unnormalised Walsh-Hadamard transform
            for t in range(nt):
                o[m[t]] += c[t]
            h = 1
            while h < size:
                for blk in range(size // (2 * h)):
                    i = blk * 2 * h
                    for j in range(i, i + h):
                        a = o[j]
                        b = o[j + h]
                        o[j] = a + b
                        o[j + h] = a - b
                h *= 2
    return out


def apply_cz(double complex[::1] amps, int a, int b):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t lo, hi, i, j, k, bi, bj
    if a > b:
        a, b = b, a
    lo = (<Py_ssize_t>1) << a
    hi = (<Py_ssize_t>1) << b
    with nogil:
        for bi in range(n // (2 * hi)):
            i = bi * 2 * hi + hi
            for bj in range(hi // (2 * lo)):
                j = i + bj * 2 * lo + lo
                for k in range(j, j + lo):
                    amps[k] = -amps[k]


def apply_x(double complex[::1] amps, int q):
    cdef Py_ssize_t i, j, blk, n = amps.shape[0], bit = (<Py_ssize_t>1) << q
    cdef double complex tmp
    with nogil:
        for blk in range(n // (2 * bit)):
            i = blk * 2 * bit
            for j in range(i, i + bit):
                tmp = amps[j]
                amps[j] = amps[j + bit]
                amps[j + bit] = tmp


def apply_z(double complex[::1] amps, int q):
    cdef Py_ssize_t i, j, blk, n = amps.shape[0], bit = (<Py_ssize_t>1) << q
    with nogil:
        for blk in range(n // (2 * bit)):
            i = blk * 2 * bit + bit
            for j in range(i, i + bit):
                amps[j] = -amps[j]


def apply_rx(double complex[::1] amps, int q, double beta):
    cdef Py_ssize_t i, j, blk, n = amps.shape[0], bit = (<Py_ssize_t>1) << q
    cdef double c = cos(beta), s = sin(beta)
    cdef double complex ms = -1j * s
    cdef double complex lo, hi
    with nogil:
        for blk in range(n // (2 * bit)):
            i = blk * 2 * bit
            for j in range(i, i + bit):
                lo = amps[j]
                hi = amps[j + bit]
                amps[j] = c * lo + ms * hi
                amps[j + bit] = c * hi + ms * lo


def apply_phase(double complex[::1] amps, const double[::1] diag, double gamma):
    cdef Py_ssize_t i, n = amps.shape[0]
    cdef double complex ph
    with nogil:
        for i in range(n):
            ph = cos(gamma * diag[i]) - 1j * sin(gamma * diag[i])
            amps[i] = amps[i] * ph


def project_out(double complex[::1] amps, int q, double complex c0, double complex c1):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t bit = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i, j, blk, dst = 0
    cdef double complex b0 = c0.conjugate(), b1 = c1.conjugate(), v
    cdef double norm = 0.0
    out = np.empty(n >> 1, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for blk in range(n // (2 * bit)):
            i = blk * 2 * bit
            for j in range(i, i + bit):
                v = b0 * amps[j] + b1 * amps[j + bit]
                o[dst] = v
                dst += 1
                norm += v.real * v.real + v.imag * v.imag
    return out, norm


def cut_values(int n_vertices, int k, us, vs, ws, int64_t start, Py_ssize_t count):
    cdef int64_t[::1] u = np.ascontiguousarray(us, dtype=np.int64)
    cdef int64_t[::1] v = np.ascontiguousarray(vs, dtype=np.int64)
    cdef double[::1] w = np.ascontiguousarray(ws, dtype=np.float64)
    out = np.empty(count, dtype=np.float64)
    cdef double[::1] o = out
    cdef int64_t[::1] digits = np.zeros(max(n_vertices, 1), dtype=np.int64)
    cdef Py_ssize_t i, e, ne = u.shape[0]
    cdef int j
    cdef int64_t rest = start
    cdef double acc
    for j in range(n_vertices):
        digits[j] = rest % k
        rest = rest // k
    with nogil:
        for i in range(count):
            acc = 0.0
            for e in range(ne):
                if digits[u[e]] != digits[v[e]]:
                    acc += w[e]
            o[i] = acc
            # base-k increment
            j = 0
            while j < n_vertices:
                digits[j] += 1
                if digits[j] < k:
                    break
                digits[j] = 0
                j += 1
    return out
