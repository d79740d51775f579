"""Pure-Python negacyclic NTT kernels.

Fallback used when the compiled extension is unavailable.  Operands are
numpy uint64 arrays (the shared container format); arithmetic runs on
Python ints, which handle the 120-bit intermediate products exactly.
"""

import numpy as np


def ntt_forward(a, p, psi_br):
    """In-place style forward negacyclic NTT (Cooley-Tukey, natural input,
    bit-reversed output, psi powers merged into the twiddles)."""
    v = a.tolist()
    w = psi_br.tolist()
    n = len(v)
    t = n
    m = 1
    while m < n:
        t >>= 1
        for i in range(m):
            j1 = 2 * i * t
            s = w[m + i]
            for j in range(j1, j1 + t):
                u = v[j]
                x = v[j + t] * s % p
                v[j] = (u + x) % p
                v[j + t] = (u - x) % p
        m <<= 1
    return np.array(v, dtype=np.uint64)


def ntt_inverse(a, p, ipsi_br, n_inv):
    """Inverse of :func:`ntt_forward` (Gentleman-Sande), scaled by 1/n."""
    v = a.tolist()
    w = ipsi_br.tolist()
    n = len(v)
    t = 1
    m = n
    while m > 1:
        h = m >> 1
        j1 = 0
        for i in range(h):
            s = w[h + i]
            for j in range(j1, j1 + t):
                u = v[j]
                x = v[j + t]
                v[j] = (u + x) % p
                v[j + t] = (u - x) * s % p
            j1 += 2 * t
        t <<= 1
        m = h
    return np.array([x * n_inv % p for x in v], dtype=np.uint64)


def pointwise_mulmod(a, b, p):
    return np.array(
        [x * y % p for x, y in zip(a.tolist(), b.tolist())], dtype=np.uint64
    )


def scalar_mulmod(a, s, p):
    s = int(s) % p
    return np.array([x * s % p for x in a.tolist()], dtype=np.uint64)
