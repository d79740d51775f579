"""CKKS-style parameter sets.

Neither profile is secure: the ring degrees are far too small for the
modulus sizes.  They exist to study numerics, depth and relative cost, and
are flagged accordingly.

The chains keep a 60-bit anchor prime at the bottom (decryption headroom)
and near-2^40 rescale primes above it, so the working scale stays within
2^-20 of 2^40 after every rescale.  A separate 60-bit prime is reserved
for relinearization key material; it is never part of the ciphertext
modulus chain, so level accounting stays a plain index into the chain.
"""

import math
from dataclasses import dataclass, field

from ..errors import ParameterError

_ALLOWED_N = (1024, 2048, 4096, 8192)

# Frozen NTT-friendly primes (p ≡ 1 mod 2N); see tests/test_params.py for
# the re-derivation that keeps these honest.
_P40_1024 = (1099511678977, 1099511683073, 1099511795713, 1099511799809)
_P60_1024 = (1152921504606877697, 1152921504606902273)
_P40_4096 = (1099511799809, 1099511922689, 1099512004609, 1099512094721)
_P60_4096 = (1152921504606904321, 1152921504606994433)


@dataclass(frozen=True)
class CkksParams:
    ring_degree: int
    modulus_chain: tuple
    scale: float = 2.0**40
    error_stddev: float = 3.2
    security_note: str = "demo-insecure"
    ks_prime: int = field(default=0)  # auxiliary relinearization prime

    def __post_init__(self):
        n = self.ring_degree
        if n not in _ALLOWED_N:
            raise ParameterError(f"ring degree {n} not in {_ALLOWED_N}")
        chain = tuple(int(q) for q in self.modulus_chain)
        if len(chain) < 2:
            raise ParameterError("modulus chain needs at least 2 primes")
        for q in chain + ((self.ks_prime,) if self.ks_prime else ()):
            if (q - 1) % (2 * n) != 0:
                raise ParameterError(f"prime {q} is not ≡ 1 mod {2 * n}")
        if self.scale <= 0 or 2.0 ** round(math.log2(self.scale)) != self.scale:
            raise ParameterError("scale must be a positive power of two")
        if self.scale >= min(chain):
            raise ParameterError("scale must be below the smallest chain prime")
        if self.security_note not in ("demo-insecure", "toy"):
            raise ParameterError("security_note must be 'demo-insecure' or 'toy'")
        object.__setattr__(self, "modulus_chain", chain)

    @property
    def slots(self):
        return self.ring_degree // 2

    @property
    def max_level(self):
        return len(self.modulus_chain) - 1

    def digest(self):
        return "N%d-L%d-s%d" % (
            self.ring_degree,
            self.max_level,
            round(math.log2(self.scale)),
        )


def fast_profile():
    """N=1024, 60+4x40 chain: quick tests, depth capacity 4."""
    return CkksParams(
        ring_degree=1024,
        modulus_chain=(_P60_1024[0],) + _P40_1024,
        ks_prime=_P60_1024[1],
        security_note="toy",
    )


def default_profile():
    """N=4096, 60+4x40 chain: the profile used for reported benchmarks."""
    return CkksParams(
        ring_degree=4096,
        modulus_chain=(_P60_4096[0],) + _P40_4096,
        ks_prime=_P60_4096[1],
        security_note="demo-insecure",
    )


def profile(name):
    if name == "fast":
        return fast_profile()
    if name == "default":
        return default_profile()
    raise ParameterError(f"unknown profile {name!r} (expected 'fast' or 'default')")


def find_ntt_primes(bit_target, ring_degree, count, skip=()):
    """Find ``count`` primes ≡ 1 mod 2N just above 2**bit_target."""
    import sympy

    two_n = 2 * ring_degree
    out = []
    p = ((1 << bit_target) // two_n) * two_n + 1
    if p <= (1 << bit_target):
        p += two_n
    while len(out) < count:
        if p not in skip and sympy.isprime(p):
            out.append(p)
        p += two_n
    return out


def params_for_depth(depth, ring_degree=1024, security_note="toy"):
    """A parameter set able to run a circuit of the given multiplicative
    depth: one 60-bit anchor plus ``depth`` rescale primes near 2^40.

    Used by the nn benchmarks, where the chain is sized to the model
    instead of the other way round.
    """
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    if ring_degree == 1024 and depth <= len(_P40_1024):
        p40, p60 = _P40_1024, _P60_1024
    elif ring_degree == 4096 and depth <= len(_P40_4096):
        p40, p60 = _P40_4096, _P60_4096
    else:
        p60 = tuple(find_ntt_primes(60, ring_degree, 2))
        p40 = tuple(find_ntt_primes(40, ring_degree, depth))
    return CkksParams(
        ring_degree=ring_degree,
        modulus_chain=(p60[0],) + tuple(p40[:depth]),
        ks_prime=p60[1],
        security_note=security_note,
    )
