"""Monomial polynomials, literature baselines and Chebyshev construction.

The :class:`Polynomial` is the unit exchanged between fitting, plaintext
evaluation and encrypted evaluation: a coefficient vector in the monomial
basis (ascending degree) plus the interval on which the approximation is
meant to be valid.  Chebyshev series are converted to this form before any
encrypted work so that every method shares one evaluation path.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


def relu(x):
    """max(0, x), elementwise on arrays."""
    return np.maximum(x, 0.0)


def _canonical(coeffs):
    cs = [float(c) for c in coeffs]
    if not cs:
        cs = [0.0]
    if not all(math.isfinite(c) for c in cs):
        raise ParameterError("polynomial coefficients must be finite")
    while len(cs) > 1 and cs[-1] == 0.0:
        cs.pop()
    return tuple(cs)


def _check_interval(interval):
    lo, hi = float(interval[0]), float(interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ParameterError(f"degenerate interval ({lo}, {hi})")
    return (lo, hi)


@dataclass(frozen=True)
class Polynomial:
    """Monomial-basis polynomial: coeffs[k] multiplies x**k.

    Trailing zero coefficients are stripped on construction, so the last
    coefficient is nonzero unless the polynomial is identically zero.
    """

    coeffs: tuple
    interval: tuple = (-1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _canonical(self.coeffs))
        object.__setattr__(self, "interval", _check_interval(self.interval))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return self.coeffs == (0.0,)

    def derivative(self):
        d = [k * c for k, c in enumerate(self.coeffs)][1:]
        return Polynomial(d or [0.0], self.interval)


@dataclass(frozen=True)
class ChebyshevSeries:
    """Coefficients of T_k on the affinely mapped interval."""

    cheb_coeffs: tuple
    interval: tuple = (-1.0, 1.0)

    def __post_init__(self):
        cs = tuple(float(c) for c in self.cheb_coeffs)
        if not cs or not all(math.isfinite(c) for c in cs):
            raise ParameterError("chebyshev coefficients must be non-empty and finite")
        object.__setattr__(self, "cheb_coeffs", cs)
        object.__setattr__(self, "interval", _check_interval(self.interval))

    @property
    def degree(self):
        return len(self.cheb_coeffs) - 1

    def __call__(self, x):
        lo, hi = self.interval
        u = (2.0 * np.asarray(x, dtype=float) - (lo + hi)) / (hi - lo)
        return np.polynomial.chebyshev.chebval(u, self.cheb_coeffs)


def make_x_squared(interval=(-1.0, 1.0)):
    """The classic CryptoNets replacement f(x) = x^2."""
    return Polynomial((0.0, 0.0, 1.0), interval)


def make_fastercryptonets(interval=(-1.0, 1.0)):
    """The minimax quadratic 0.125x^2 + 0.5x + 0.25 from FasterCryptoNets."""
    return Polynomial((0.25, 0.5, 0.125), interval)


def make_kernel_paper(interval=(-1.0, 1.0)):
    """The published kernel-smoothed quadratic 0.082261 + 0.495588x + 0.444488x^2."""
    return Polynomial((0.082261, 0.495588, 0.444488), interval)


def chebyshev_series_of(f, degree, interval=(-1.0, 1.0), quad_nodes=4096):
    """Degree-truncated Chebyshev series of ``f`` on ``interval``.

    Coefficients come from Gauss-Chebyshev quadrature with ``quad_nodes``
    nodes; the rule is exact for integrands that are polynomials of degree
    < quad_nodes, so the precondition quad_nodes >= 4*degree keeps plenty
    of headroom.
    """
    lo, hi = _check_interval(interval)
    if degree < 1:
        raise ParameterError("degree must be >= 1")
    if quad_nodes < 4 * degree:
        raise ParameterError("quad_nodes must be >= 4 * degree")
    m = int(quad_nodes)
    theta = np.pi * (np.arange(1, m + 1) - 0.5) / m
    nodes = np.cos(theta)
    fv = np.asarray(f(0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)), dtype=float)
    ks = np.arange(degree + 1)
    coeffs = (2.0 / m) * (np.cos(np.outer(ks, theta)) @ fv)
    coeffs[0] *= 0.5
    return ChebyshevSeries(tuple(coeffs), (lo, hi))


def chebyshev_relu(degree, interval=(-1.0, 1.0), quad_nodes=4096):
    """Truncated Chebyshev series of ReLU on the interval."""
    return chebyshev_series_of(relu, degree, interval, quad_nodes)


def cheb_to_monomial(series):
    """Convert a ChebyshevSeries to the equivalent monomial Polynomial on
    the same interval (T_k recurrence plus the affine domain map)."""
    lo, hi = series.interval
    mono_u = np.polynomial.chebyshev.cheb2poly(series.cheb_coeffs)
    # substitute u = (2x - (lo+hi)) / (hi-lo)
    affine = np.polynomial.Polynomial([-(lo + hi) / (hi - lo), 2.0 / (hi - lo)])
    composed = np.polynomial.Polynomial(mono_u)(affine)
    return Polynomial(tuple(composed.coef), (lo, hi))


def eval(p, x):  # noqa: A001 - the spec-level name; builtins.eval is not shadowed elsewhere
    """Horner evaluation of p at a scalar x."""
    acc = 0.0
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


def eval_batch(p, xs):
    """Elementwise Horner evaluation; accepts a SampleSet or array-like."""
    values = np.asarray(getattr(xs, "values", xs), dtype=float)
    acc = np.zeros_like(values)
    for c in reversed(p.coeffs):
        acc = acc * values + c
    return acc


def power_basis_steps(nonzero_ks):
    """Multiplication plan for the power-basis strategy.

    Returns the list of (k, a, b) products x^k = x^a * x^b needed to reach
    every power in ``nonzero_ks`` (all >= 1), ascending in k.  The split
    uses the largest power of two below k, which gives the squaring-chain
    depth ceil(log2(k)) for every power.
    """
    needed = set()
    stack = [k for k in nonzero_ks if k > 1]
    while stack:
        k = stack.pop()
        if k in needed:
            continue
        needed.add(k)
        h = 1 << ((k - 1).bit_length() - 1)
        for part in (h, k - h):
            if part > 1:
                stack.append(part)
    steps = []
    for k in sorted(needed):
        h = 1 << ((k - 1).bit_length() - 1)
        steps.append((k, h, k - h))
    return steps


def eval_power_basis(p, xs):
    """Evaluate p with the exact operation order of the encrypted evaluator.

    The encrypted path computes powers by a squaring chain, multiplies each
    by its coefficient, sums ascending, then adds the constant term.  Using
    the same float operation order here makes the plaintext reference and
    the noiseless HE backend agree bit for bit.
    """
    x = np.asarray(xs, dtype=float)
    ks = [k for k, c in enumerate(p.coeffs) if k >= 1 and c != 0.0]
    powers = {1: x}
    for k, a, b in power_basis_steps(ks):
        powers[k] = powers[a] * powers[b]
    acc = None
    for k in ks:
        term = p.coeffs[k] * powers[k]
        acc = term if acc is None else acc + term
    c0 = p.coeffs[0]
    if acc is None:
        return np.full_like(x, c0)
    if c0 != 0.0:
        acc = acc + c0
    return acc


def mult_depth(p):
    """Modulus levels consumed by the encrypted power-basis evaluation:
    0 for constants, else ceil(log2(degree)) + 1 (squaring chain plus the
    coefficient multiplication layer)."""
    d = p.degree
    if d <= 0 or p.is_zero():
        return 0
    return (d - 1).bit_length() + 1


def to_json(p):
    """Serialize with coefficients at 6 decimal places (the precision the
    published coefficients are quoted at)."""
    return json.dumps(
        {
            "coeffs": [round(c, 6) for c in p.coeffs],
            "interval": [p.interval[0], p.interval[1]],
        }
    )


def from_json(text):
    obj = json.loads(text)
    return Polynomial(tuple(obj["coeffs"]), tuple(obj["interval"]))
