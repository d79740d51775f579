"""Backend-generic homomorphic polynomial evaluation.

Power-basis strategy: powers of the input come from a squaring chain, each
surviving power is multiplied by its coefficient (the one extra level every
polynomial pays), the terms are summed at a common level, and the constant
term is added for free.  Consumes exactly ``poly.mult_depth(p)`` levels.

The same code runs against the real CKKS evaluator and the plaintext
reference backend, which is what makes the reference backend a usable
oracle for every encrypted test.
"""

from ..errors import LevelExhaustedError
from ..poly import mult_depth, power_basis_steps


def eval_poly(evaluator, ct, p, keys=None):
    """Evaluate Polynomial ``p`` slotwise on ciphertext ``ct``."""
    depth = mult_depth(p)
    if depth > ct.level:
        raise LevelExhaustedError(
            f"degree-{p.degree} evaluation needs {depth} levels, "
            f"ciphertext has {ct.level}"
        )
    if depth == 0:
        return evaluator.constant_ciphertext(p.coeffs[0], like=ct)

    ks = [k for k, c in enumerate(p.coeffs) if k >= 1 and c != 0.0]
    powers = {1: ct}
    for k, a, b in power_basis_steps(ks):
        ca, cb = powers[a], powers[b]
        target = min(ca.level, cb.level)
        if ca.level > target:
            ca = evaluator.drop_to_level(ca, target)
        if cb.level > target:
            cb = evaluator.drop_to_level(cb, target)
        powers[k] = evaluator.mul(ca, cb, keys)

    final_level = ct.level - depth
    acc = None
    for k in ks:
        term_in = evaluator.drop_to_level(powers[k], final_level + 1)
        coeff_pt = evaluator.encode(
            p.coeffs[k],
            level=final_level + 1,
            scale=evaluator.chain[final_level + 1],
        )
        term = evaluator.mul_plain(term_in, coeff_pt)
        acc = term if acc is None else evaluator.add(acc, term)

    if p.coeffs[0] != 0.0:
        const_pt = evaluator.encode(p.coeffs[0], level=acc.level, scale=acc.scale)
        acc = evaluator.add_plain(acc, const_pt)
    return acc
