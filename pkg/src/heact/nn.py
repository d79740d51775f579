"""Tiny MLP with a pluggable activation (ReLU or any Polynomial).

The plaintext forward pass accumulates the linear layers feature by
feature and evaluates polynomial activations with the encrypted power
basis operation order, so that the noiseless reference HE backend
reproduces it bit for bit.  Training is plain minibatch gradient descent
with softmax cross-entropy; polynomial activations use their exact
analytic derivative.
"""

import json
from dataclasses import dataclass
from importlib.resources import files

import numpy as np

from . import evalharness
from . import poly as polymod
from .errors import (
    IncompatibleActivationError,
    LevelExhaustedError,
    ParameterError,
    TrainingDivergedError,
)
from .he import eval_poly
from .poly import Polynomial


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 64
    learning_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if min(self.epochs, self.batch_size) < 1 or self.learning_rate <= 0:
            raise ParameterError("train config values must be positive")


@dataclass
class MlpModel:
    layers: list  # [(weight out x in, bias out), ...]
    activation: object  # "relu" or Polynomial
    input_dim: int
    num_classes: int

    @property
    def dims(self):
        return [self.input_dim] + [w.shape[0] for w, _ in self.layers]


def calibration():
    """Frozen noise/dataset constants used as regression bounds."""
    return json.loads(files("heact").joinpath("data/calibration.json").read_text())


def _check_activation(activation):
    if activation == "relu" or isinstance(activation, Polynomial):
        return activation
    raise ParameterError("activation must be 'relu' or a Polynomial")


def init_mlp(dims, activation, seed):
    """Deterministic scaled-uniform init: U(-a, a) with a = sqrt(3/fan_in)."""
    if len(dims) < 2:
        raise ParameterError("need at least input and output dimensions")
    activation = _check_activation(activation)
    rng = np.random.Generator(np.random.PCG64(seed))
    layers = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(3.0 / fan_in)
        w = rng.uniform(-bound, bound, (fan_out, fan_in))
        layers.append((w, np.zeros(fan_out)))
    return MlpModel(layers, activation, dims[0], dims[-1])


def _activation_apply(activation, z):
    if activation == "relu":
        return np.maximum(z, 0.0)
    return polymod.eval_power_basis(activation, z)


def _activation_grad(activation, z):
    if activation == "relu":
        return (z > 0).astype(float)
    dp = activation.derivative()
    acc = np.zeros_like(z)
    for c in reversed(dp.coeffs):
        acc = acc * z + c
    return acc


def _linear(a, w, b):
    """w @ x + b for a batch, accumulated feature by feature in index
    order (the same order the encrypted layer uses)."""
    z = a[:, 0][:, None] * w[:, 0][None, :]
    for j in range(1, w.shape[1]):
        z = z + a[:, j][:, None] * w[:, j][None, :]
    return z + b[None, :]


def _forward_cached(model, x):
    a = np.atleast_2d(np.asarray(x, dtype=float))
    if a.shape[1] != model.input_dim:
        raise ParameterError(
            f"input dimension {a.shape[1]} != model input {model.input_dim}"
        )
    zs, acts = [], [a]
    for li, (w, b) in enumerate(model.layers):
        z = _linear(acts[-1], w, b)
        zs.append(z)
        if li < len(model.layers) - 1:
            acts.append(_activation_apply(model.activation, z))
    return zs, acts


def forward(model, x):
    """Logits for one example (1-d input) or a batch (2-d input)."""
    single = np.asarray(x).ndim == 1
    zs, _ = _forward_cached(model, x)
    logits = zs[-1]
    return logits[0] if single else logits


def _softmax(z):
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(model, x, labels):
    """Mean softmax cross-entropy and backprop gradients per layer."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    labels = np.asarray(labels, dtype=int)
    zs, acts = _forward_cached(model, x)
    probs = _softmax(zs[-1])
    n = len(labels)
    eps = 1e-12
    loss = -float(np.mean(np.log(probs[np.arange(n), labels] + eps)))
    delta = probs.copy()
    delta[np.arange(n), labels] -= 1.0
    delta /= n
    grads = [None] * len(model.layers)
    for li in range(len(model.layers) - 1, -1, -1):
        w, _ = model.layers[li]
        grads[li] = (delta.T @ acts[li], delta.sum(axis=0))
        if li > 0:
            da = delta @ w
            delta = da * _activation_grad(model.activation, zs[li - 1])
    return loss, grads


def train(model, data, cfg):
    """Minibatch gradient descent; deterministic given the config seed."""
    if data.split != "train":
        raise ParameterError("train() expects the train split")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    layers = [(w.copy(), b.copy()) for w, b in model.layers]
    model = MlpModel(layers, model.activation, model.input_dim, model.num_classes)
    history = []
    n = len(data)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = loss_and_grads(model, data.points[idx], data.labels[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}", epoch=epoch
                )
            losses.append(loss)
            for (w, b), (gw, gb) in zip(model.layers, grads):
                w -= cfg.learning_rate * gw
                b -= cfg.learning_rate * gb
        history.append(float(np.mean(losses)))
    return model, history


def evaluate(model, data):
    """Argmax-logit accuracy on the test split."""
    if data.split != "test":
        raise ParameterError("evaluate() expects the test split")
    logits = forward(model, data.points)
    pred = np.argmax(logits, axis=1)
    return evalharness.accuracy(pred, data.labels)


def depth_budget(model):
    """Levels an encrypted forward pass consumes: one per linear layer
    plus the activation depth per hidden layer."""
    if not isinstance(model.activation, Polynomial):
        raise IncompatibleActivationError(
            "only polynomial activations run under encryption"
        )
    n_layers = len(model.layers)
    return n_layers + (n_layers - 1) * polymod.mult_depth(model.activation)


def encrypted_forward(model, enc_x, keys, evaluator):
    """Forward pass on encrypted inputs: one ciphertext per input feature,
    slots carrying the batch.  Returns one logits ciphertext per class."""
    if not isinstance(model.activation, Polynomial):
        raise IncompatibleActivationError(
            "ReLU cannot run under HE; swap in a Polynomial activation"
        )
    if len(enc_x) != model.input_dim:
        raise ParameterError(
            f"expected {model.input_dim} input ciphertexts, got {len(enc_x)}"
        )
    needed = depth_budget(model)
    available = enc_x[0].level
    if needed > available:
        raise LevelExhaustedError(
            f"encrypted forward needs {needed} levels, only {available} available"
        )
    acts = list(enc_x)
    for li, (w, b) in enumerate(model.layers):
        level = acts[0].level
        outs = []
        for i in range(w.shape[0]):
            acc = None
            for j in range(w.shape[1]):
                coeff = evaluator.encode(
                    w[i, j], level=level, scale=evaluator.chain[level]
                )
                term = evaluator.mul_plain(acts[j], coeff)
                acc = term if acc is None else evaluator.add(acc, term)
            bias = evaluator.encode(b[i], level=acc.level, scale=acc.scale)
            outs.append(evaluator.add_plain(acc, bias))
        if li < len(model.layers) - 1:
            outs = [eval_poly(evaluator, o, model.activation, keys) for o in outs]
        acts = outs
    return acts


def _encrypted_logits_batch(model, points, keys, evaluator):
    """Encrypt a batch (in slot-size chunks), run the encrypted forward
    pass, decrypt, and return the logits matrix."""
    slots = evaluator.params.slots
    out = []
    for start in range(0, len(points), slots):
        chunk = points[start : start + slots]
        enc_x = [
            evaluator.encrypt(evaluator.encode(chunk[:, j]), keys)
            for j in range(chunk.shape[1])
        ]
        enc_logits = encrypted_forward(model, enc_x, keys, evaluator)
        cols = [
            evaluator.decode(evaluator.decrypt(ct, keys))[: len(chunk)]
            for ct in enc_logits
        ]
        out.append(np.stack(cols, axis=1))
    return np.concatenate(out)


def accuracy_gap(model, data, keys, evaluator):
    """Plaintext vs encrypted accuracy on the same examples."""
    if data.split != "test":
        raise ParameterError("accuracy_gap() expects the test split")
    plain_acc = evaluate(model, data)
    logits = _encrypted_logits_batch(model, data.points, keys, evaluator)
    enc_acc = evalharness.accuracy(np.argmax(logits, axis=1), data.labels)
    return {"plain_acc": plain_acc, "enc_acc": enc_acc, "gap": enc_acc - plain_acc}


def model_to_json(model):
    """9-decimal JSON serialization consumed by the CLI."""
    if model.activation == "relu":
        act = {"kind": "relu"}
    else:
        act = {
            "kind": "poly",
            "coeffs": [round(c, 9) for c in model.activation.coeffs],
            "interval": list(model.activation.interval),
        }
    payload = {
        "dims": model.dims,
        "activation": act,
        "layers": [
            {
                "w": [[round(float(x), 9) for x in row] for row in w],
                "b": [round(float(x), 9) for x in b],
            }
            for w, b in model.layers
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def model_from_json(text):
    obj = json.loads(text)
    act = obj["activation"]
    if act["kind"] == "relu":
        activation = "relu"
    else:
        activation = Polynomial(tuple(act["coeffs"]), tuple(act["interval"]))
    layers = [
        (np.array(layer["w"], dtype=float), np.array(layer["b"], dtype=float))
        for layer in obj["layers"]
    ]
    dims = obj["dims"]
    return MlpModel(layers, activation, dims[0], dims[-1])
