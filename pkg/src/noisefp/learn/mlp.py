"""Fully connected sigmoid networks trained by backpropagation.

The default objective is the per-sample squared error
``0.5 * sum_i (d_i - y_i)**2`` against one-hot targets, averaged over each
mini-batch.  ``ChunkedMlpModel`` splits the input vector into contiguous
chunks, gives each chunk its own first hidden layer and concatenates their
outputs before the shared upper layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import ConfigError, EmptyInputError, ShapeError
from .config import NETWORK_EPOCHS, NETWORK_LEARNING_RATE, TrainConfig

MAX_HIDDEN_LAYERS = 3


sigmoid = expit


def one_hot(y, k):
    y = np.asarray(y, dtype=np.int64)
    out = np.zeros((y.size, k))
    out[np.arange(y.size), y] = 1.0
    return out


def mlp_error(d, y):
    """Squared error ``0.5 * sum((d - y)**2)`` of one target/output pair."""
    d = np.asarray(d, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if d.shape != y.shape:
        raise ShapeError(f"target shape {d.shape} != output shape {y.shape}")
    return 0.5 * float(np.sum((d - y) ** 2))


def glorot_uniform(rng, fan_in, fan_out):
    r = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-r, r, size=(fan_in, fan_out))


@dataclass
class MlpModel:
    """``weights[l]`` has shape (in, out); activations are row vectors."""

    weights: list
    biases: list

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ShapeError("need one bias vector per weight matrix")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if b.shape != (w.shape[1],):
                raise ShapeError(f"layer {l}: bias {b.shape} vs weights {w.shape}")
            if l and w.shape[0] != self.weights[l - 1].shape[1]:
                raise ShapeError(f"layer {l} input {w.shape[0]} != previous output {self.weights[l - 1].shape[1]}")

    @property
    def layer_sizes(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def class_count(self):
        return self.weights[-1].shape[1]

    @property
    def input_dim(self):
        return self.weights[0].shape[0]

    @classmethod
    def initialise(cls, layer_sizes, rng):
        ws = [glorot_uniform(rng, a, b) for a, b in zip(layer_sizes[:-1], layer_sizes[1:])]
        return cls(ws, [np.zeros(b) for b in layer_sizes[1:]])

    def params(self):
        return [p for pair in zip(self.weights, self.biases) for p in pair]


def _check_hidden(layer_sizes):
    hidden = len(layer_sizes) - 2
    if not 1 <= hidden <= MAX_HIDDEN_LAYERS:
        raise ConfigError(f"need 1..{MAX_HIDDEN_LAYERS} hidden layers, got {hidden}")
    if min(layer_sizes) < 1:
        raise ConfigError(f"layer sizes must be positive: {layer_sizes}")


def _forward(weights, biases, a):
    acts = [a]
    for w, b in zip(weights, biases):
        acts.append(sigmoid(acts[-1] @ w + b))
    return acts


def _output_delta(out, target, loss):
    """dL/dz at the output for the batch-mean loss."""
    m = out.shape[0]
    if loss == "squared":
        return (out - target) * out * (1.0 - out) / m
    return (out - target) / m


def _batch_loss(out, target, loss):
    if loss == "squared":
        return 0.5 * np.sum((target - out) ** 2) / out.shape[0]
    eps = 1e-300
    return -np.sum(target * np.log(out + eps) + (1 - target) * np.log(1 - out + eps)) / out.shape[0]


def _backward(weights, acts, delta, input_grad=False):
    """Gradients for every layer, plus dL/d(input) when ``input_grad``."""
    gw = [None] * len(weights)
    gb = [None] * len(weights)
    back = None
    for l in range(len(weights) - 1, -1, -1):
        gw[l] = acts[l].T @ delta
        gb[l] = delta.sum(axis=0)
        if l or input_grad:
            back = delta @ weights[l].T
        if l:
            a = acts[l]
            delta = back * a * (1.0 - a)
    return gw, gb, back


def _as_inputs(dim, X):
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != dim:
        raise ShapeError(f"model expects {dim} inputs, got {X.shape[-1]}")
    return X


def mlp_forward(model, x):
    """Sigmoid outputs in (0, 1) for one input or a batch."""
    x = _as_inputs(model.input_dim, x)
    return _forward(model.weights, model.biases, x)[-1]


def mlp_predict(model, X):
    """Argmax class; ties go to the lowest index."""
    return np.argmax(mlp_forward(model, X), axis=-1)


def mlp_loss_grad(model, X, Y, loss="squared"):
    """Batch-mean loss and gradients ``[dW0, db0, dW1, db1, ...]``."""
    X = _as_inputs(model.input_dim, X)
    acts = _forward(model.weights, model.biases, X)
    gw, gb, _ = _backward(model.weights, acts, _output_delta(acts[-1], Y, loss))
    return _batch_loss(acts[-1], Y, loss), [g for pair in zip(gw, gb) for g in pair]


# ---- chunked first layer --------------------------------------------------

def chunk_bounds(dim, chunk_count):
    """Contiguous chunks of size ceil(dim / chunk_count); the last is shorter."""
    if chunk_count < 2:
        raise ConfigError(f"chunk_count must be >= 2, got {chunk_count}")
    size = -(-dim // chunk_count)
    bounds = [(s, min(s + size, dim)) for s in range(0, dim, size)]
    if len(bounds) != chunk_count:
        raise ConfigError(f"{dim} inputs cannot be cut into {chunk_count} non-empty chunks")
    return bounds


def split_width(width, parts):
    base, extra = divmod(width, parts)
    if base < 1:
        raise ConfigError(f"hidden width {width} too small for {parts} chunks")
    return [base + (i < extra) for i in range(parts)]


@dataclass
class ChunkedMlpModel:
    """Per-chunk first layers feeding a shared sigmoid stack.

    ``chunk_weights[c]`` maps input slice ``bounds[c]`` to that chunk's
    hidden units; ``upper`` consumes the concatenated chunk outputs.
    """

    bounds: list
    chunk_weights: list
    chunk_biases: list
    upper: MlpModel

    @property
    def input_dim(self):
        return self.bounds[-1][1]

    @property
    def chunk_count(self):
        return len(self.bounds)

    @property
    def class_count(self):
        return self.upper.class_count

    @property
    def layer_sizes(self):
        """Equivalent plain-network sizes (first hidden = total chunk width)."""
        return [self.input_dim] + self.upper.layer_sizes

    @classmethod
    def initialise(cls, layer_sizes, chunk_count, rng):
        bounds = chunk_bounds(layer_sizes[0], chunk_count)
        widths = split_width(layer_sizes[1], chunk_count)
        cw = [glorot_uniform(rng, hi - lo, w) for (lo, hi), w in zip(bounds, widths)]
        cb = [np.zeros(w) for w in widths]
        return cls(bounds, cw, cb, MlpModel.initialise(layer_sizes[1:], rng))

    def params(self):
        chunk = [p for pair in zip(self.chunk_weights, self.chunk_biases) for p in pair]
        return chunk + self.upper.params()

    def block_diagonal(self):
        """The same network as a plain MlpModel with a block-diagonal first layer."""
        widths = [w.shape[1] for w in self.chunk_weights]
        first = np.zeros((self.input_dim, sum(widths)))
        col = 0
        for (lo, hi), w in zip(self.bounds, self.chunk_weights):
            first[lo:hi, col:col + w.shape[1]] = w
            col += w.shape[1]
        return MlpModel([first] + list(self.upper.weights),
                        [np.concatenate(self.chunk_biases)] + list(self.upper.biases))


def _chunked_forward(model, X):
    hidden = [sigmoid(X[:, lo:hi] @ w + b)
              for (lo, hi), w, b in zip(model.bounds, model.chunk_weights, model.chunk_biases)]
    return hidden, _forward(model.upper.weights, model.upper.biases, np.concatenate(hidden, axis=1))


def chunked_forward(model, x):
    x = _as_inputs(model.input_dim, x)
    single = x.ndim == 1
    out = _chunked_forward(model, np.atleast_2d(x))[1][-1]
    return out[0] if single else out


def chunked_predict(model, X):
    return np.argmax(chunked_forward(model, X), axis=-1)


def chunked_loss_grad(model, X, Y, loss="squared"):
    X = _as_inputs(model.input_dim, X)
    hidden, acts = _chunked_forward(model, X)
    gw, gb, back = _backward(model.upper.weights, acts, _output_delta(acts[-1], Y, loss), True)
    grads = []
    col = 0
    for (lo, hi), h in zip(model.bounds, hidden):
        delta = back[:, col:col + h.shape[1]] * h * (1.0 - h)
        grads += [X[:, lo:hi].T @ delta, delta.sum(axis=0)]
        col += h.shape[1]
    return _batch_loss(acts[-1], Y, loss), grads + [g for pair in zip(gw, gb) for g in pair]


# ---- training --------------------------------------------------------------

def _sgd(model, loss_grad, X, y, config):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInputError("no training data")
    if X.shape[0] != y.size:
        raise ShapeError(f"{X.shape[0]} samples but {y.size} labels")
    Y = one_hot(y, model.class_count)
    rng = np.random.default_rng([config.seed, 1])
    rate = config.rate(NETWORK_LEARNING_RATE)
    params = model.params()
    history = []
    for _ in range(config.steps(NETWORK_EPOCHS)):
        order = rng.permutation(X.shape[0])
        total = 0.0
        for s in range(0, order.size, config.batch_size):
            idx = order[s:s + config.batch_size]
            loss, grads = loss_grad(model, X[idx], Y[idx], config.loss)
            total += loss * idx.size
            for p, g in zip(params, grads):
                p -= rate * g
        history.append(total / X.shape[0])
    model.history = history
    return model


def mlp_train(X, y, layer_sizes, config=TrainConfig()):
    """Mini-batch SGD on the mean squared error (or ``config.loss``).

    Weights start uniform in +-sqrt(6/(fan_in+fan_out)) and biases at zero;
    each epoch visits the data in a fresh seeded order.
    """
    layer_sizes = [int(s) for s in layer_sizes]
    _check_hidden(layer_sizes)
    model = MlpModel.initialise(layer_sizes, np.random.default_rng([config.seed, 0]))
    return _sgd(model, mlp_loss_grad, X, y, config)


def mlp_train_averaged(X, y, chunk_count, layer_sizes, config=TrainConfig()):
    """Train a :class:`ChunkedMlpModel`.

    ``layer_sizes[1]`` is the total first-hidden width, shared out evenly
    over the chunks, so the hidden budget matches a plain network of the
    same ``layer_sizes``.
    """
    layer_sizes = [int(s) for s in layer_sizes]
    _check_hidden(layer_sizes)
    model = ChunkedMlpModel.initialise(layer_sizes, chunk_count, np.random.default_rng([config.seed, 0]))
    return _sgd(model, chunked_loss_grad, X, y, config)
