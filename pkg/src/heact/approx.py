"""Kernel-smoothed polynomial approximation of ReLU.

The pipeline: smooth ReLU with a tanh-kernel ridge regressor, predict on a
validation set, then fit a low-degree polynomial to those predictions by
least squares.  The resulting quadratic is the drop-in activation for the
encrypted network.  ``degree_sweep`` runs the pipeline across degrees and
attaches encrypted-cost measurements so the accuracy/cost trade-off tables
can be regenerated.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import poly as polymod
from .errors import NumericError, ParameterError
from .he import CkksEvaluator, eval_poly, serialize_ciphertext
from .poly import Polynomial, relu

SUPPORT_CAP = 2048  # Gram solve is O(n^3); subsample beyond this
_SUBSAMPLE_SEED = 20210


@dataclass(frozen=True)
class KernelModel:
    """Dual form of the tanh-kernel ridge regressor: prediction is
    sum_i dual_weights[i] * tanh(x * support_x[i] + 1)."""

    support_x: np.ndarray
    dual_weights: np.ndarray
    ridge_lambda: float
    offset: float = 1.0

    def __post_init__(self):
        if len(self.support_x) != len(self.dual_weights) or len(self.support_x) == 0:
            raise ParameterError("support points and dual weights must match and be non-empty")
        if self.ridge_lambda <= 0:
            raise ParameterError("ridge_lambda must be positive")
        if not (np.isfinite(self.support_x).all() and np.isfinite(self.dual_weights).all()):
            raise ParameterError("kernel model values must be finite")


@dataclass(frozen=True)
class FitReport:
    degree: int
    polynomial: Polynomial
    train_mse: float
    val_mse: float
    design_condition: float
    fit_seconds: float


@dataclass(frozen=True)
class CostRecord:
    """Encrypted-cost row attached to a sweep entry.  ``error`` is set (and
    the measurements are None) when the degree does not fit the chain."""

    levels: int = None
    enc_latency_s: float = None
    total_s: float = None
    ct_bytes: int = None
    enc_mse: float = None
    error: str = None


def kernel_value(x, xp):
    """tanh(x * x' + 1), the smoothing kernel."""
    return math.tanh(x * xp + 1.0)


def _gram(xs, xq=None):
    xq = xs if xq is None else xq
    return np.tanh(np.outer(xq, xs) + 1.0)


def fit_kernel_ridge(train_x, train_y, ridge_lambda):
    """Solve (G + lambda I) alpha = y for the dual weights."""
    xs = np.asarray(getattr(train_x, "values", train_x), dtype=float)
    ys = np.asarray(train_y, dtype=float)
    if xs.shape != ys.shape:
        raise ParameterError(f"sizes differ: {xs.shape} inputs vs {ys.shape} targets")
    if len(xs) < 2:
        raise ParameterError("need at least two training points")
    if ridge_lambda <= 0:
        raise ParameterError("ridge_lambda must be positive")
    if len(xs) > SUPPORT_CAP:
        idx = np.random.Generator(np.random.PCG64(_SUBSAMPLE_SEED)).choice(
            len(xs), SUPPORT_CAP, replace=False
        )
        idx.sort()
        xs, ys = xs[idx], ys[idx]
    g = _gram(xs)
    a = g + ridge_lambda * np.eye(len(xs))
    alpha = np.linalg.solve(a, ys)
    if not np.isfinite(alpha).all():
        raise NumericError("kernel ridge solve produced non-finite weights")
    y_norm = np.linalg.norm(ys)
    resid = np.linalg.norm(a @ alpha - ys)
    if y_norm > 0 and resid / y_norm > 1e-8:
        raise NumericError(
            f"kernel ridge solve residual {resid / y_norm:.2e} exceeds 1e-8"
        )
    return KernelModel(xs, alpha, float(ridge_lambda))


def kernel_predict(model, x):
    """Predict at scalar x or an array of points."""
    x = np.asarray(x, dtype=float)
    out = np.tanh(np.multiply.outer(x, model.support_x) + model.offset) @ model.dual_weights
    return out if out.ndim else float(out)


def polyfit(xs, ys, degree):
    """Least-squares monomial fit of degree ``degree``.

    Inputs are affinely mapped to [-1, 1] before building the Vandermonde
    matrix (keeps the design condition small at degree 5); the solve is
    SVD-based, never the normal equations; the returned coefficients are
    mapped back to the original variable.
    """
    t0 = time.perf_counter()
    xs = np.asarray(getattr(xs, "values", xs), dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise ParameterError(f"sizes differ: {xs.shape} vs {ys.shape}")
    if degree < 0:
        raise ParameterError("degree must be >= 0")
    if len(xs) <= degree:
        raise ParameterError(
            f"underdetermined fit: {len(xs)} points for degree {degree}"
        )
    lo, hi = xs.min(), xs.max()
    if degree >= 1 and lo == hi:
        raise ParameterError("inputs are all identical; cannot fit degree >= 1")
    if lo == hi:
        u = np.zeros_like(xs)
        interval = (lo - 0.5, hi + 0.5)
    else:
        u = (2.0 * xs - (lo + hi)) / (hi - lo)
        interval = (lo, hi)
    design = np.vander(u, degree + 1, increasing=True)
    coeffs_u, _, rank, sv = np.linalg.lstsq(design, ys, rcond=None)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if rank < degree + 1:
        raise NumericError(
            f"rank-deficient design matrix (rank {rank} < {degree + 1}, "
            f"condition estimate {condition:.3g})"
        )
    if lo == hi:
        coeffs = coeffs_u
    else:
        affine = np.polynomial.Polynomial([-(lo + hi) / (hi - lo), 2.0 / (hi - lo)])
        coeffs = np.polynomial.Polynomial(coeffs_u)(affine).coef
    p = Polynomial(tuple(coeffs), interval)
    fitted = polymod.eval_batch(p, xs)
    train_mse = float(np.mean((fitted - ys) ** 2))
    return FitReport(
        degree=degree,
        polynomial=p,
        train_mse=train_mse,
        val_mse=float("nan"),
        design_condition=condition,
        fit_seconds=time.perf_counter() - t0,
    )


def run_pipeline(train, val, degree, ridge_lambda=1e-3):
    """The full smoothing-then-fitting pipeline.

    Targets are ReLU on the training inputs; the kernel is ridge-fitted to
    them; the polynomial is least-squares fitted to the kernel predictions
    on the validation inputs; val_mse is measured against true ReLU on the
    validation set.
    """
    t0 = time.perf_counter()
    train_x = np.asarray(getattr(train, "values", train), dtype=float)
    val_x = np.asarray(getattr(val, "values", val), dtype=float)
    if len(train_x) == 0 or len(val_x) == 0:
        raise ParameterError("train and val sets must be non-empty")
    if degree < 0:
        raise ParameterError("degree must be >= 0")
    model = fit_kernel_ridge(train_x, relu(train_x), ridge_lambda)
    yhat = kernel_predict(model, val_x)
    report = polyfit(val_x, yhat, degree)
    p = report.polynomial
    val_mse = float(np.mean((polymod.eval_batch(p, val_x) - relu(val_x)) ** 2))
    report = FitReport(
        degree=report.degree,
        polynomial=p,
        train_mse=report.train_mse,
        val_mse=val_mse,
        design_condition=report.design_condition,
        fit_seconds=time.perf_counter() - t0,
    )
    return p, report


def select_degree(reports, slack=0.05):
    """Smallest degree whose val_mse is within ``slack`` of the minimum."""
    ok = [r for r in reports if not math.isnan(r.val_mse)]
    if not ok:
        return None
    best = min(r.val_mse for r in ok)
    for r in sorted(ok, key=lambda r: r.degree):
        if r.val_mse <= best * (1.0 + slack):
            return r.degree
    return None


def measure_encrypted_cost(p, he_params, samples=None, enc_seed=0, key_seed=0):
    """Encrypted-evaluation cost and fidelity for one polynomial.

    ``enc_latency_s`` times a single full-slots activation; ``enc_mse`` is
    the encrypted approximation error against ReLU over all the provided
    samples (chunked across ciphertexts), directly comparable to the
    plaintext val_mse on the same samples; ``total_s`` covers the whole
    pipeline including key setup, encryption and decryption.  A polynomial
    too deep for the chain is reported in-row rather than raised.
    """
    depth = polymod.mult_depth(p)
    if depth > he_params.max_level:
        return CostRecord(error="depth exceeds modulus chain")
    t_total = time.perf_counter()
    ev = CkksEvaluator(he_params, enc_seed=enc_seed)
    keys = ev.keygen(key_seed)
    if samples is None:
        values = np.linspace(-1.0, 1.0, he_params.slots)
    else:
        values = np.asarray(getattr(samples, "values", samples), dtype=float)
    slots = he_params.slots
    enc_latency = None
    ct_bytes = None
    levels = None
    decoded = []
    for start in range(0, len(values), slots):
        chunk = values[start : start + slots]
        ct = ev.encrypt(ev.encode(chunk), keys)
        t_eval = time.perf_counter()
        out = eval_poly(ev, ct, p, keys)
        if enc_latency is None:
            enc_latency = time.perf_counter() - t_eval
            ct_bytes = len(serialize_ciphertext(ct, he_params))
            levels = ct.level - out.level
        decoded.append(ev.decode(ev.decrypt(out, keys))[: len(chunk)])
    total = time.perf_counter() - t_total
    decoded = np.concatenate(decoded)
    enc_mse = float(np.mean((decoded - relu(values)) ** 2))
    return CostRecord(
        levels=levels,
        enc_latency_s=enc_latency,
        total_s=total,
        ct_bytes=ct_bytes,
        enc_mse=enc_mse,
    )


def degree_sweep(train, val, degrees, ridge_lambda, he_params):
    """Run the pipeline per degree and attach encrypted-cost rows."""
    if not degrees:
        raise ParameterError("degrees must be non-empty")
    if any(d < 1 for d in degrees):
        raise ParameterError("sweep degrees must be >= 1")
    rows = []
    val_x = np.asarray(getattr(val, "values", val), dtype=float)
    for d in degrees:
        p, report = run_pipeline(train, val, d, ridge_lambda)
        cost = measure_encrypted_cost(p, he_params, samples=val_x)
        rows.append((report, cost))
    return rows
