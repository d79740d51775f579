"""Minimal leveled CKKS-style evaluator.

Supports exactly what polynomial activations need: canonical-embedding
encode/decode, RLWE encrypt/decrypt, homomorphic add and multiply with
relinearization and rescaling, and explicit level management.  Ring
elements are held in RNS form, one uint64 residue row per active chain
prime; all ring products go through the negacyclic NTT kernels.

Relinearization uses per-prime digit decomposition against key material
defined modulo (chain product) * (auxiliary 60-bit prime); the division by
the auxiliary prime keeps the key-switching noise far below the working
scale.  Keys are generated for every level at which a multiplication can
occur, which keeps the decomposition constants exact at each level.

No bootstrapping, no rotations, no automatic level alignment: callers
(``eval_poly``, the nn layer code) manage levels explicitly, which is what
makes the depth accounting auditable.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    AlignmentError,
    LevelExhaustedError,
    ParameterError,
    RangeError,
)
from . import ntt
from .params import CkksParams

_SCALE_RTOL = 1e-5  # legitimate rescale drift is < 2^-20 relative
_HEADROOM_BITS = 10


@dataclass
class Plaintext:
    rns: np.ndarray  # shape (level+1, N), uint64 residues
    level: int
    scale: float


@dataclass
class Ciphertext:
    parts: list  # 2 (or transiently 3) rns arrays
    level: int
    scale: float
    mult_count: int = 0

    def __post_init__(self):
        if len(self.parts) not in (2, 3):
            raise ParameterError("ciphertext must have 2 or 3 parts")


@dataclass
class KeySet:
    secret_key: np.ndarray  # ternary coefficients, int64
    public_key: tuple  # (b, a) rns rows over the full chain, NTT domain
    relin_key: dict  # level -> list of (b_i, a_i) rows over chain[:level+1]+ks, NTT domain
    seed: int
    sk_ntt: np.ndarray = field(repr=False, default=None)  # per chain prime
    sk2_ntt: np.ndarray = field(repr=False, default=None)


def _reduce_signed(vec, primes):
    """Rows of a small signed integer vector modulo each prime."""
    v = np.asarray(vec, dtype=np.int64)
    return np.stack([(v % p).astype(np.uint64) for p in primes])


def _add_rows(a, b, primes):
    out = a + b
    for i, p in enumerate(primes):
        np.subtract(out[i], p, out=out[i], where=out[i] >= p)
    return out


def _sub_rows(a, b, primes):
    out = np.empty_like(a)
    for i, p in enumerate(primes):
        t = a[i] + (p - b[i])
        np.subtract(t, p, out=t, where=t >= p)
        out[i] = t
    return out


def _neg_rows(a, primes):
    out = np.empty_like(a)
    for i, p in enumerate(primes):
        out[i] = np.where(a[i] == 0, 0, p - a[i])
    return out


def _centered(row, p):
    """Residue row lifted to the centered representative, as int64."""
    r = row.astype(np.int64)
    return np.where(r > p // 2, r - p, r)


class CkksEvaluator:
    """Stateful wrapper around one parameter set.

    The evaluator owns the encryption randomness stream (seedable, so runs
    are reproducible) and caches the NTT plans for the chain primes.
    """

    def __init__(self, params: CkksParams, enc_seed=0):
        if not params.ks_prime:
            raise ParameterError("params must carry an auxiliary ks_prime")
        self.params = params
        self.n = params.ring_degree
        self.chain = params.modulus_chain
        self.ks_prime = params.ks_prime
        self.enc_seed = enc_seed
        self._enc_rng = np.random.Generator(np.random.PCG64(enc_seed))
        k = np.arange(self.n)
        self._zeta = np.exp(1j * np.pi * k / self.n)
        self._izeta = np.exp(-1j * np.pi * k / self.n)
        for p in self.chain + (self.ks_prime,):
            ntt.get_plan(self.n, p)

    # -- helpers ---------------------------------------------------------

    def _plan(self, p):
        return ntt.get_plan(self.n, p)

    def _mul_rows(self, a, b, primes):
        return np.stack(
            [ntt.negacyclic_mul(a[i], b[i], self._plan(p)) for i, p in enumerate(primes)]
        )

    def _ntt_rows(self, a, primes):
        return np.stack([ntt.forward(a[i], self._plan(p)) for i, p in enumerate(primes)])

    def _intt_rows(self, a, primes):
        return np.stack([ntt.inverse(a[i], self._plan(p)) for i, p in enumerate(primes)])

    def _gauss(self):
        e = np.rint(self._enc_rng.normal(0.0, self.params.error_stddev, self.n))
        return e.astype(np.int64)

    def _ternary(self):
        return self._enc_rng.integers(-1, 2, self.n).astype(np.int64)

    def _modulus_product(self, level):
        q = 1
        for p in self.chain[: level + 1]:
            q *= p
        return q

    # -- key generation --------------------------------------------------

    def keygen(self, seed):
        """Deterministic key material from one seed."""
        rng = np.random.Generator(np.random.PCG64(seed))
        full = self.chain + (self.ks_prime,)
        s = rng.integers(-1, 2, self.n).astype(np.int64)
        s_rows_full = _reduce_signed(s, full)
        s_ntt_full = self._ntt_rows(s_rows_full, full)
        s2_ntt_full = np.stack(
            [ntt.pointwise(s_ntt_full[i], s_ntt_full[i], p) for i, p in enumerate(full)]
        )

        nchain = len(self.chain)
        a = np.stack(
            [rng.integers(0, p, self.n, dtype=np.uint64) for p in self.chain]
        )
        e = np.rint(rng.normal(0.0, self.params.error_stddev, self.n)).astype(np.int64)
        a_ntt = self._ntt_rows(a, self.chain)
        a_s = self._intt_rows(
            np.stack(
                [ntt.pointwise(a_ntt[i], s_ntt_full[i], p) for i, p in enumerate(self.chain)]
            ),
            self.chain,
        )
        b = _add_rows(_neg_rows(a_s, self.chain), _reduce_signed(e, self.chain), self.chain)
        pk = (self._ntt_rows(b, self.chain), a_ntt)

        relin = {}
        for level in range(1, len(self.chain)):
            basis = self.chain[: level + 1] + (self.ks_prime,)
            q_l = self._modulus_product(level)
            keys = []
            for i, qi in enumerate(self.chain[: level + 1]):
                t_i = self.ks_prime * (q_l // qi)  # the embedded digit factor
                a_i = np.stack(
                    [rng.integers(0, p, self.n, dtype=np.uint64) for p in basis]
                )
                e_i = np.rint(
                    rng.normal(0.0, self.params.error_stddev, self.n)
                ).astype(np.int64)
                a_i_ntt = self._ntt_rows(a_i, basis)
                rows_b = []
                for j, m in enumerate(basis):
                    sk_j = ntt.forward(_reduce_signed(s, (m,))[0], self._plan(m))
                    sk2_j = ntt.pointwise(sk_j, sk_j, m)
                    a_s_j = ntt.inverse(
                        ntt.pointwise(a_i_ntt[j], sk_j, m), self._plan(m)
                    )
                    t_s2 = ntt.inverse(
                        ntt.scalar_mul(sk2_j, t_i % m, m), self._plan(m)
                    )
                    row = _add_rows(
                        _neg_rows(a_s_j[None], (m,)),
                        _reduce_signed(e_i, (m,)),
                        (m,),
                    )
                    row = _add_rows(row, t_s2[None], (m,))[0]
                    rows_b.append(ntt.forward(row, self._plan(m)))
                keys.append((np.stack(rows_b), a_i_ntt))
            relin[level] = keys

        return KeySet(
            secret_key=s,
            public_key=pk,
            relin_key=relin,
            seed=seed,
            sk_ntt=s_ntt_full[:nchain],
            sk2_ntt=s2_ntt_full[:nchain],
        )

    # -- encoding --------------------------------------------------------

    def encode(self, values, level=None, scale=None):
        """Inverse canonical embedding of a slot vector, scaled and rounded."""
        level = self.params.max_level if level is None else level
        scale = self.params.scale if scale is None else float(scale)
        if not 0 <= level <= self.params.max_level:
            raise ParameterError(f"level {level} outside chain")
        primes = self.chain[: level + 1]
        if np.isscalar(values):
            coeffs = np.zeros(self.n, dtype=np.int64)
            c = round(float(values) * scale)
            self._check_headroom(abs(c), level)
            coeffs[0] = c
            return Plaintext(_reduce_signed(coeffs, primes), level, scale)
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or len(v) > self.n // 2:
            raise ParameterError(f"need a 1-d vector of at most {self.n // 2} slots")
        slots = np.zeros(self.n // 2)
        slots[: len(v)] = v
        if len(v):
            self._check_headroom(np.abs(v).max() * scale, level)
        full = np.empty(self.n, dtype=complex)
        full[: self.n // 2] = slots
        full[self.n // 2 :] = np.conj(slots[::-1])
        b = np.fft.fft(full) / self.n
        coeffs = np.rint((b * self._izeta).real * scale).astype(np.int64)
        return Plaintext(_reduce_signed(coeffs, primes), level, scale)

    def _check_headroom(self, max_abs_scaled, level):
        q = self._modulus_product(level)
        if (int(max_abs_scaled) + 1) << _HEADROOM_BITS >= q // 2:
            raise RangeError(
                f"encoded magnitude {max_abs_scaled:.3g} exceeds headroom of "
                f"level-{level} modulus"
            )

    def decode(self, pt):
        """Forward canonical embedding divided by the plaintext scale."""
        primes = self.chain[: pt.level + 1]
        if len(primes) == 1:
            coeffs = _centered(pt.rns[0], primes[0]).astype(float)
        else:
            q = self._modulus_product(pt.level)
            half = q // 2
            recon = [0] * self.n
            for i, p in enumerate(primes):
                m_i = q // p
                y_i = pow(m_i, -1, p)
                t = ntt.scalar_mul(pt.rns[i], y_i, p).tolist()
                for j in range(self.n):
                    recon[j] += t[j] * m_i
            coeffs = np.array(
                [float(x % q - q) if (x % q) > half else float(x % q) for x in recon]
            )
        slots = self.n * np.fft.ifft(coeffs * self._zeta)
        return slots[: self.n // 2].real / pt.scale

    # -- encryption ------------------------------------------------------

    def encrypt(self, pt, keys):
        primes = self.chain[: pt.level + 1]
        u = _reduce_signed(self._ternary(), primes)
        u_ntt = self._ntt_rows(u, primes)
        pk_b, pk_a = keys.public_key
        c0 = self._intt_rows(
            np.stack(
                [ntt.pointwise(pk_b[i], u_ntt[i], p) for i, p in enumerate(primes)]
            ),
            primes,
        )
        c1 = self._intt_rows(
            np.stack(
                [ntt.pointwise(pk_a[i], u_ntt[i], p) for i, p in enumerate(primes)]
            ),
            primes,
        )
        c0 = _add_rows(c0, _reduce_signed(self._gauss(), primes), primes)
        c0 = _add_rows(c0, pt.rns, primes)
        c1 = _add_rows(c1, _reduce_signed(self._gauss(), primes), primes)
        return Ciphertext([c0, c1], pt.level, pt.scale, 0)

    def decrypt(self, ct, keys):
        primes = self.chain[: ct.level + 1]
        c1_ntt = self._ntt_rows(ct.parts[1], primes)
        acc = np.stack(
            [
                ntt.pointwise(c1_ntt[i], keys.sk_ntt[i], p)
                for i, p in enumerate(primes)
            ]
        )
        if len(ct.parts) == 3:
            c2_ntt = self._ntt_rows(ct.parts[2], primes)
            acc = _add_rows(
                acc,
                np.stack(
                    [
                        ntt.pointwise(c2_ntt[i], keys.sk2_ntt[i], p)
                        for i, p in enumerate(primes)
                    ]
                ),
                primes,
            )
        m = _add_rows(ct.parts[0], self._intt_rows(acc, primes), primes)
        return Plaintext(m, ct.level, ct.scale)

    # -- arithmetic ------------------------------------------------------

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
        if len(a.parts) != len(b.parts):
            raise AlignmentError("add: part count mismatch")
        primes = self.chain[: a.level + 1]
        parts = [_add_rows(x, y, primes) for x, y in zip(a.parts, b.parts)]
        return Ciphertext(parts, a.level, a.scale, max(a.mult_count, b.mult_count))

    def add_plain(self, ct, pt):
        self._check_aligned(ct, pt, "add_plain")
        primes = self.chain[: ct.level + 1]
        parts = [_add_rows(ct.parts[0], pt.rns, primes)] + [
            p.copy() for p in ct.parts[1:]
        ]
        return Ciphertext(parts, ct.level, ct.scale, ct.mult_count)

    def _require_level(self, ct, what):
        if ct.level < 1:
            raise LevelExhaustedError(f"{what}: no modulus levels remaining")

    def _rescale(self, rows, level):
        """Divide by the top active prime; returns rows for level-1."""
        primes = self.chain[: level + 1]
        q_top = primes[-1]
        last_centered = _centered(rows[-1], q_top)
        out = []
        for i, p in enumerate(primes[:-1]):
            diff = (rows[i].astype(np.int64) - last_centered) % p
            out.append(ntt.scalar_mul(diff.astype(np.uint64), pow(q_top, -1, p), p))
        return np.stack(out)

    def _relinearize(self, d2, level, keys):
        """Key-switch a degree-2 component back to (part0, part1) rows."""
        primes = self.chain[: level + 1]
        basis = primes + (self.ks_prime,)
        q_l = self._modulus_product(level)
        acc0 = np.zeros((len(basis), self.n), dtype=np.uint64)
        acc1 = np.zeros_like(acc0)
        for i, qi in enumerate(primes):
            y_i = pow(q_l // qi, -1, qi)
            digit = ntt.scalar_mul(d2[i], y_i, qi).astype(np.int64)
            rk_b, rk_a = keys.relin_key[level][i]
            for j, m in enumerate(basis):
                d_m = ntt.forward((digit % m).astype(np.uint64), self._plan(m))
                acc0[j] = _add_rows(
                    acc0[j][None],
                    ntt.inverse(ntt.pointwise(d_m, rk_b[j], m), self._plan(m))[None],
                    (m,),
                )[0]
                acc1[j] = _add_rows(
                    acc1[j][None],
                    ntt.inverse(ntt.pointwise(d_m, rk_a[j], m), self._plan(m))[None],
                    (m,),
                )[0]
        # exact division by the auxiliary prime (centered rounding)
        out = []
        for acc in (acc0, acc1):
            ks_centered = _centered(acc[-1], self.ks_prime)
            rows = []
            for i, p in enumerate(primes):
                diff = (acc[i].astype(np.int64) - ks_centered) % p
                rows.append(
                    ntt.scalar_mul(
                        diff.astype(np.uint64), pow(self.ks_prime, -1, p), p
                    )
                )
            out.append(np.stack(rows))
        return out

    def _tensor(self, a, b):
        """Raw ciphertext product: 3 parts, no relinearization or rescale."""
        self._check_level_eq(a, b)
        primes = self.chain[: a.level + 1]
        a0 = self._ntt_rows(a.parts[0], primes)
        a1 = self._ntt_rows(a.parts[1], primes)
        b0 = self._ntt_rows(b.parts[0], primes)
        b1 = self._ntt_rows(b.parts[1], primes)

        def pw(x, y):
            return np.stack(
                [ntt.pointwise(x[i], y[i], p) for i, p in enumerate(primes)]
            )

        d0 = self._intt_rows(pw(a0, b0), primes)
        cross = _add_rows(pw(a0, b1), pw(a1, b0), primes)
        d1 = self._intt_rows(cross, primes)
        d2 = self._intt_rows(pw(a1, b1), primes)
        return Ciphertext(
            [d0, d1, d2],
            a.level,
            a.scale * b.scale,
            max(a.mult_count, b.mult_count),
        )

    def _check_level_eq(self, a, b):
        if a.level != b.level:
            raise AlignmentError(
                f"mul: level mismatch ({a.level} vs {b.level}); "
                "drop the shallower operand first"
            )

    def mul(self, a, b, keys):
        """Ciphertext-ciphertext product with relinearization and rescale."""
        self._require_level(a, "mul")
        self._check_level_eq(a, b)
        t = self._tensor(a, b)
        r0, r1 = self._relinearize(t.parts[2], t.level, keys)
        primes = self.chain[: t.level + 1]
        c0 = _add_rows(t.parts[0], r0, primes)
        c1 = _add_rows(t.parts[1], r1, primes)
        q_top = primes[-1]
        return Ciphertext(
            [self._rescale(c0, t.level), self._rescale(c1, t.level)],
            t.level - 1,
            t.scale / q_top,
            max(a.mult_count, b.mult_count) + 1,
        )

    def mul_plain(self, ct, pt):
        """Ciphertext-plaintext product; rescales, so it costs one level."""
        self._require_level(ct, "mul_plain")
        if ct.level != pt.level:
            raise AlignmentError(
                f"mul_plain: level mismatch ({ct.level} vs {pt.level})"
            )
        primes = self.chain[: ct.level + 1]
        pt_ntt = self._ntt_rows(pt.rns, primes)
        parts = []
        for part in ct.parts:
            part_ntt = self._ntt_rows(part, primes)
            prod = np.stack(
                [
                    ntt.pointwise(part_ntt[i], pt_ntt[i], p)
                    for i, p in enumerate(primes)
                ]
            )
            parts.append(self._rescale(self._intt_rows(prod, primes), ct.level))
        q_top = primes[-1]
        return Ciphertext(
            parts, ct.level - 1, ct.scale * pt.scale / q_top, ct.mult_count + 1
        )

    def drop_to_level(self, ct, level):
        """Forget high chain primes; value and scale are unchanged."""
        if level > ct.level:
            raise AlignmentError(f"cannot raise level {ct.level} to {level}")
        if level < 0:
            raise LevelExhaustedError("drop_to_level: below level 0")
        parts = [p[: level + 1].copy() for p in ct.parts]
        return Ciphertext(parts, level, ct.scale, ct.mult_count)

    def constant_ciphertext(self, value, like):
        """Trivial (noiseless) ciphertext holding a constant in every slot."""
        pt = self.encode(float(value), level=like.level, scale=like.scale)
        zero = np.zeros_like(pt.rns)
        return Ciphertext([pt.rns, zero], like.level, like.scale, like.mult_count)


# -- serialization -------------------------------------------------------

_MAGIC_CT = b"CKT1"
_MAGIC_KEY = b"CKK1"


def serialize_ciphertext(ct, params):
    """16-byte header {magic, N, level, scale exponent} followed by
    length-prefixed little-endian coefficient arrays, one per RNS row."""
    import math

    head = struct.pack(
        "<4sIiI",
        _MAGIC_CT,
        params.ring_degree,
        ct.level,
        int(round(math.log2(ct.scale)) + 2**16),
    )
    body = [head]
    for part in ct.parts:
        for row in part:
            data = row.astype("<u8").tobytes()
            body.append(struct.pack("<I", len(row)))
            body.append(data)
    return b"".join(body)


def deserialize_ciphertext(blob, params):
    magic, n, level, scale_code = struct.unpack_from("<4sIiI", blob, 0)
    if magic != _MAGIC_CT:
        raise ParameterError("not a ciphertext blob")
    if n != params.ring_degree:
        raise ParameterError("ring degree mismatch")
    off = 16
    rows = []
    while off < len(blob):
        (count,) = struct.unpack_from("<I", blob, off)
        off += 4
        rows.append(np.frombuffer(blob, dtype="<u8", count=count, offset=off).copy())
        off += 8 * count
    per_part = level + 1
    parts = [
        np.stack(rows[i : i + per_part]) for i in range(0, len(rows), per_part)
    ]
    return Ciphertext(parts, level, 2.0 ** (scale_code - 2**16), 0)


def serialize_keyset(keys, params):
    """Size-accounting serialization of the public evaluation material."""
    chunks = [struct.pack("<4sIiI", _MAGIC_KEY, params.ring_degree, keys.seed % 2**31, 0)]
    for arr in keys.public_key:
        for row in arr:
            chunks.append(struct.pack("<I", len(row)))
            chunks.append(row.astype("<u8").tobytes())
    for level_keys in keys.relin_key.values():
        for rk_b, rk_a in level_keys:
            for arr in (rk_b, rk_a):
                for row in arr:
                    chunks.append(struct.pack("<I", len(row)))
                    chunks.append(row.astype("<u8").tobytes())
    return b"".join(chunks)
