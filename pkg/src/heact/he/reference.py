"""Plaintext twin of the CKKS evaluator.

Same interface, same level/scale bookkeeping, same error conditions, but
slot values are stored raw and arithmetic is exact floating point.  Every
test of the real backend uses this one as the oracle; circuits that run on
both must agree within the per-operation noise tolerances and must hit the
same accounting errors on the same step.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import AlignmentError, LevelExhaustedError, ParameterError, RangeError
from .ckks import _SCALE_RTOL, _HEADROOM_BITS


@dataclass
class RefPlaintext:
    values: np.ndarray
    level: int
    scale: float


@dataclass
class RefCiphertext:
    values: np.ndarray
    level: int
    scale: float
    mult_count: int = 0


@dataclass
class RefKeySet:
    seed: int


class ReferenceEvaluator:
    def __init__(self, params, enc_seed=0):
        self.params = params
        self.n = params.ring_degree
        self.chain = params.modulus_chain
        self.enc_seed = enc_seed

    def keygen(self, seed):
        return RefKeySet(seed)

    def _modulus_product(self, level):
        q = 1
        for p in self.chain[: level + 1]:
            q *= p
        return q

    def _check_headroom(self, max_abs_scaled, level):
        if (int(max_abs_scaled) + 1) << _HEADROOM_BITS >= self._modulus_product(level) // 2:
            raise RangeError(
                f"encoded magnitude {max_abs_scaled:.3g} exceeds headroom of "
                f"level-{level} modulus"
            )

    def encode(self, values, level=None, scale=None):
        level = self.params.max_level if level is None else level
        scale = self.params.scale if scale is None else float(scale)
        if not 0 <= level <= self.params.max_level:
            raise ParameterError(f"level {level} outside chain")
        slots = np.zeros(self.n // 2)
        if np.isscalar(values):
            self._check_headroom(abs(float(values)) * scale, level)
            slots[:] = float(values)
        else:
            v = np.asarray(values, dtype=float)
            if v.ndim != 1 or len(v) > self.n // 2:
                raise ParameterError(f"need a 1-d vector of at most {self.n // 2} slots")
            if len(v):
                self._check_headroom(np.abs(v).max() * scale, level)
            slots[: len(v)] = v
        return RefPlaintext(slots, level, scale)

    def decode(self, pt):
        return pt.values.copy()

    def encrypt(self, pt, keys):
        return RefCiphertext(pt.values.copy(), pt.level, pt.scale, 0)

    def decrypt(self, ct, keys):
        return RefPlaintext(ct.values.copy(), ct.level, ct.scale)

    def _check_aligned(self, a, b, what):
        if a.level != b.level:
            raise AlignmentError(
                f"{what}: level mismatch ({a.level} vs {b.level}); "
                "no automatic alignment is performed"
            )
        if abs(a.scale - b.scale) > _SCALE_RTOL * max(a.scale, b.scale):
            raise AlignmentError(
                f"{what}: scale mismatch ({a.scale:.6g} vs {b.scale:.6g})"
            )

    def add(self, a, b):
        self._check_aligned(a, b, "add")
        return RefCiphertext(
            a.values + b.values, a.level, a.scale, max(a.mult_count, b.mult_count)
        )

    def add_plain(self, ct, pt):
        self._check_aligned(ct, pt, "add_plain")
        return RefCiphertext(ct.values + pt.values, ct.level, ct.scale, ct.mult_count)

    def _require_level(self, ct, what):
        if ct.level < 1:
            raise LevelExhaustedError(f"{what}: no modulus levels remaining")

    def mul(self, a, b, keys):
        self._require_level(a, "mul")
        if a.level != b.level:
            raise AlignmentError(
                f"mul: level mismatch ({a.level} vs {b.level}); "
                "drop the shallower operand first"
            )
        q_top = self.chain[a.level]
        return RefCiphertext(
            a.values * b.values,
            a.level - 1,
            a.scale * b.scale / q_top,
            max(a.mult_count, b.mult_count) + 1,
        )

    def mul_plain(self, ct, pt):
        self._require_level(ct, "mul_plain")
        if ct.level != pt.level:
            raise AlignmentError(
                f"mul_plain: level mismatch ({ct.level} vs {pt.level})"
            )
        q_top = self.chain[ct.level]
        return RefCiphertext(
            ct.values * pt.values,
            ct.level - 1,
            ct.scale * pt.scale / q_top,
            ct.mult_count + 1,
        )

    def drop_to_level(self, ct, level):
        if level > ct.level:
            raise AlignmentError(f"cannot raise level {ct.level} to {level}")
        if level < 0:
            raise LevelExhaustedError("drop_to_level: below level 0")
        return RefCiphertext(ct.values.copy(), level, ct.scale, ct.mult_count)

    def constant_ciphertext(self, value, like):
        values = np.full(self.n // 2, float(value))
        return RefCiphertext(values, like.level, like.scale, like.mult_count)
