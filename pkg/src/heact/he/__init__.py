"""Leveled CKKS-style evaluator with a plaintext reference twin."""

from .params import (
    CkksParams,
    default_profile,
    fast_profile,
    find_ntt_primes,
    params_for_depth,
    profile,
)
from .ckks import (
    Ciphertext,
    CkksEvaluator,
    KeySet,
    Plaintext,
    deserialize_ciphertext,
    serialize_ciphertext,
    serialize_keyset,
)
from .reference import ReferenceEvaluator, RefCiphertext, RefKeySet, RefPlaintext
from .poly_eval import eval_poly
from .ntt import backend_name

__all__ = [
    "CkksParams",
    "CkksEvaluator",
    "ReferenceEvaluator",
    "Ciphertext",
    "KeySet",
    "Plaintext",
    "RefCiphertext",
    "RefKeySet",
    "RefPlaintext",
    "eval_poly",
    "profile",
    "fast_profile",
    "default_profile",
    "params_for_depth",
    "find_ntt_primes",
    "serialize_ciphertext",
    "deserialize_ciphertext",
    "serialize_keyset",
    "backend_name",
]
