# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled negacyclic NTT kernels (the hot loop of every encrypted op).

Same contracts as ``_ntt_py``; modular products go through unsigned
128-bit intermediates, so primes up to 62 bits are safe.
"""

import numpy as np

from libc.stdint cimport uint64_t

cdef extern from *:
    ctypedef unsigned long long uint128_t "unsigned __int128"


cdef inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t p) nogil:
    return <uint64_t>((<uint128_t>a * b) % p)


def ntt_forward(a, p, psi_br):
    cdef uint64_t[::1] v = np.array(a, dtype=np.uint64)
    cdef const uint64_t[::1] w = psi_br
    cdef uint64_t q = p
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t t = n, m = 1, i, j, j1
    cdef uint64_t s, u, x
    with nogil:
        while m < n:
            t >>= 1
            for i in range(m):
                j1 = 2 * i * t
                s = w[m + i]
                for j in range(j1, j1 + t):
                    u = v[j]
                    x = mulmod(v[j + t], s, q)
                    v[j] = (u + x) % q
                    v[j + t] = (u + q - x) % q
            m <<= 1
    return np.asarray(v)


def ntt_inverse(a, p, ipsi_br, n_inv):
    cdef uint64_t[::1] v = np.array(a, dtype=np.uint64)
    cdef const uint64_t[::1] w = ipsi_br
    cdef uint64_t q = p
    cdef uint64_t ninv = n_inv
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t t = 1, m = n, h, i, j, j1
    cdef uint64_t s, u, x
    with nogil:
        while m > 1:
            h = m >> 1
            j1 = 0
            for i in range(h):
                s = w[h + i]
                for j in range(j1, j1 + t):
                    u = v[j]
                    x = v[j + t]
                    v[j] = (u + x) % q
                    v[j + t] = mulmod(u + q - x, s, q)
                j1 += 2 * t
            t <<= 1
            m = h
        for j in range(n):
            v[j] = mulmod(v[j], ninv, q)
    return np.asarray(v)


def pointwise_mulmod(a, b, p):
    cdef const uint64_t[::1] x = a
    cdef const uint64_t[::1] y = b
    cdef uint64_t q = p
    cdef Py_ssize_t n = x.shape[0], i
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = mulmod(x[i], y[i], q)
    return out


def scalar_mulmod(a, s, p):
    cdef const uint64_t[::1] x = a
    cdef uint64_t q = p
    cdef uint64_t c = int(s) % p
    cdef Py_ssize_t n = x.shape[0], i
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = mulmod(x[i], c, q)
    return out
