"""Negacyclic ring arithmetic plans and kernel backend selection.

The compiled extension is preferred when importable; otherwise the pure
Python kernels are used.  ``HEACT_NTT_BACKEND=python`` forces the fallback
(useful for the backend comparison benchmark).
"""

import os
import threading

import numpy as np

from ..errors import ParameterError
from . import _ntt_py

try:
    from . import _ntt_cy
except ImportError:  # extension not built
    _ntt_cy = None

if os.environ.get("HEACT_NTT_BACKEND", "").lower() in ("py", "python", "pure"):
    _impl = _ntt_py
else:
    _impl = _ntt_cy if _ntt_cy is not None else _ntt_py

BACKEND = "cython" if _impl is _ntt_cy else "python"


def backend_name():
    return BACKEND


def _bit_reverse(i, bits):
    out = 0
    for _ in range(bits):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


def _find_psi(n, p):
    """A primitive 2n-th root of unity mod p (requires p ≡ 1 mod 2n)."""
    if (p - 1) % (2 * n) != 0:
        raise ParameterError(f"prime {p} is not NTT-friendly for ring degree {n}")
    for g in range(2, 1000):
        psi = pow(g, (p - 1) // (2 * n), p)
        if pow(psi, n, p) == p - 1:
            return psi
    raise ParameterError(f"no primitive 2*{n}-th root of unity found mod {p}")


class NttPlan:
    """Precomputed twiddle tables for one (ring degree, prime) pair."""

    def __init__(self, n, p):
        if n & (n - 1) or n < 2:
            raise ParameterError("ring degree must be a power of two >= 2")
        self.n = n
        self.p = p
        psi = _find_psi(n, p)
        ipsi = pow(psi, -1, p)
        bits = n.bit_length() - 1
        self.psi_br = np.array(
            [pow(psi, _bit_reverse(i, bits), p) for i in range(n)], dtype=np.uint64
        )
        self.ipsi_br = np.array(
            [pow(ipsi, _bit_reverse(i, bits), p) for i in range(n)], dtype=np.uint64
        )
        self.n_inv = pow(n, -1, p)


_plans = {}
_plans_lock = threading.Lock()


def get_plan(n, p):
    key = (n, p)
    plan = _plans.get(key)
    if plan is None:
        with _plans_lock:
            plan = _plans.get(key)
            if plan is None:
                plan = NttPlan(n, p)
                _plans[key] = plan
    return plan


def forward(a, plan, impl=None):
    return (impl or _impl).ntt_forward(a, plan.p, plan.psi_br)


def inverse(a, plan, impl=None):
    return (impl or _impl).ntt_inverse(a, plan.p, plan.ipsi_br, plan.n_inv)


def pointwise(a, b, p, impl=None):
    return (impl or _impl).pointwise_mulmod(a, b, p)


def scalar_mul(a, s, p, impl=None):
    return (impl or _impl).scalar_mulmod(a, s, p)


def negacyclic_mul(a, b, plan, impl=None):
    """Product of two coefficient vectors in Z_p[x]/(x^n + 1)."""
    k = impl or _impl
    fa = k.ntt_forward(a, plan.p, plan.psi_br)
    fb = k.ntt_forward(b, plan.p, plan.psi_br)
    fc = k.pointwise_mulmod(fa, fb, plan.p)
    return k.ntt_inverse(fc, plan.p, plan.ipsi_br, plan.n_inv)


def schoolbook_negacyclic(a, b, p):
    """O(n^2) reference product, the oracle for the NTT path."""
    av, bv = a.tolist(), b.tolist()
    n = len(av)
    out = [0] * n
    for i, ai in enumerate(av):
        if ai == 0:
            continue
        for j, bj in enumerate(bv):
            k = i + j
            term = ai * bj
            if k < n:
                out[k] = (out[k] + term) % p
            else:
                out[k - n] = (out[k - n] - term) % p
    return np.array(out, dtype=np.uint64)
