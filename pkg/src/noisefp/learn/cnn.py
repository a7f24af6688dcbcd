"""A small 1-D convolutional network over raw time-domain segments.

Default layout for a 4096-sample input::

    conv(16 x 9, stride 4) -> ReLU -> maxpool(4)     4096 -> 1022 -> 255
    conv(32 x 9, stride 2) -> ReLU -> maxpool(4)      255 ->  124 ->  31
    dense(31 * 32 -> K) -> softmax

Convolutions are "valid" and pooling drops any incomplete final window.
Training minimises mean cross-entropy with plain mini-batch SGD.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import EmptyInputError, ShapeError
from .config import CNN_LEARNING_RATE, NETWORK_EPOCHS, TrainConfig
from .mlp import glorot_uniform
from .softmax import softmax_rows

DEFAULT_STAGES = ((16, 9, 4, 4), (32, 9, 2, 4))  # (filters, width, stride, pool)


@dataclass
class ConvStage:
    filters: np.ndarray  # (out_channels, in_channels, width)
    bias: np.ndarray
    stride: int
    pool: int

    @property
    def width(self):
        return self.filters.shape[2]

    def output_length(self, n):
        conv = (n - self.width) // self.stride + 1
        return conv, conv // self.pool


@dataclass
class CnnModel:
    input_length: int
    stages: list
    dense_w: np.ndarray  # (C * L, K); input is the last pooled map flattened channel by channel
    dense_b: np.ndarray
    history: list = field(default_factory=list, repr=False, compare=False)

    @property
    def class_count(self):
        return self.dense_b.size

    def shape_trace(self):
        """[(length, channels)] after input, each conv and each pool, then K."""
        n, c = self.input_length, 1
        trace = [(n, c)]
        for st in self.stages:
            conv, pooled = st.output_length(n)
            c = st.filters.shape[0]
            trace += [(conv, c), (pooled, c)]
            n = pooled
        return trace + [(self.class_count,)]

    def params(self):
        out = []
        for st in self.stages:
            out += [st.filters, st.bias]
        return out + [self.dense_w, self.dense_b]

    @classmethod
    def initialise(cls, input_length, class_count, rng, stages=DEFAULT_STAGES):
        n, c = input_length, 1
        built = []
        for filters, width, stride, pool in stages:
            if n < width:
                raise ShapeError(f"stage input length {n} shorter than filter width {width}")
            w = glorot_uniform(rng, c * width, filters).T.reshape(filters, c, width)
            st = ConvStage(np.ascontiguousarray(w), np.zeros(filters), stride, pool)
            n = st.output_length(n)[1]
            if n < 1:
                raise ShapeError("input too short for the configured stages")
            built.append(st)
            c = filters
        flat = n * c
        return cls(input_length, built, glorot_uniform(rng, flat, class_count), np.zeros(class_count))


def _conv_forward(a, st):
    # a: (m, C, L) -> cols: (m, Lout, C*W)
    m, c, _ = a.shape
    win = sliding_window_view(a, st.width, axis=2)[:, :, ::st.stride, :]
    cols = win.transpose(0, 2, 1, 3).reshape(m, win.shape[2], c * st.width)
    z = cols @ st.filters.reshape(st.filters.shape[0], -1).T + st.bias
    return z.transpose(0, 2, 1), cols


def _conv_backward(dz, cols, st, in_shape):
    # dz: (m, F, Lout)
    m, c, n = in_shape
    f, _, w = st.filters.shape
    dzt = dz.transpose(0, 2, 1)  # (m, Lout, F)
    gw = np.tensordot(dzt, cols, axes=([0, 1], [0, 1])).reshape(f, c, w)
    gb = dz.sum(axis=(0, 2))
    dcols = (dzt @ st.filters.reshape(f, -1)).reshape(m, -1, c, w)
    lout = dz.shape[2]
    da = np.zeros(in_shape)
    stop = st.stride * (lout - 1) + 1
    for k in range(w):
        da[:, :, k:k + stop:st.stride] += dcols[:, :, :, k].transpose(0, 2, 1)
    return gw, gb, da


def _pool_forward(a, pool):
    m, c, n = a.shape
    keep = (n // pool) * pool
    blocks = a[:, :, :keep].reshape(m, c, n // pool, pool)
    arg = blocks.argmax(axis=3)
    return np.take_along_axis(blocks, arg[..., None], axis=3)[..., 0], arg


def _pool_backward(dout, arg, pool, n):
    m, c, p = dout.shape
    blocks = np.zeros((m, c, p, pool))
    np.put_along_axis(blocks, arg[..., None], dout[..., None], axis=3)
    da = np.zeros((m, c, n))
    da[:, :, :p * pool] = blocks.reshape(m, c, p * pool)
    return da


def _forward(model, X):
    a = X[:, None, :]
    cache = []
    for st in model.stages:
        z, cols = _conv_forward(a, st)
        r = np.maximum(z, 0.0)
        pooled, arg = _pool_forward(r, st.pool)
        cache.append((a.shape, cols, z, arg))
        a = pooled
    flat = a.reshape(a.shape[0], -1)
    probs = softmax_rows(flat @ model.dense_w + model.dense_b)
    return probs, flat, a.shape, cache


def _check_input(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != model.input_length:
        raise ShapeError(f"CNN expects {model.input_length} samples, got {X.shape[-1]}")
    return X


def cnn_predict(model, segment):
    """Class probabilities for one raw segment or an ``(m, L)`` batch."""
    X = _check_input(model, segment)
    single = X.ndim == 1
    probs = _forward(model, np.atleast_2d(X))[0]
    return probs[0] if single else probs


def cnn_classify(model, X):
    return np.argmax(cnn_predict(model, X), axis=-1)


def cnn_loss_grad(model, X, y):
    """Mean cross-entropy and gradients in :meth:`CnnModel.params` order."""
    X = _check_input(model, X)
    m = X.shape[0]
    probs, flat, pooled_shape, cache = _forward(model, X)
    loss = -np.mean(np.log(probs[np.arange(m), y]))
    dlogits = probs.copy()
    dlogits[np.arange(m), y] -= 1.0
    dlogits /= m
    grads_dense = [flat.T @ dlogits, dlogits.sum(axis=0)]
    da = (dlogits @ model.dense_w.T).reshape(pooled_shape)
    stage_grads = []
    for st, (in_shape, cols, z, arg) in zip(reversed(model.stages), reversed(cache)):
        dr = _pool_backward(da, arg, st.pool, z.shape[2])
        dz = dr * (z > 0)
        gw, gb, da = _conv_backward(dz, cols, st, in_shape)
        stage_grads = [gw, gb] + stage_grads
    return loss, stage_grads + grads_dense


def cnn_train(X_raw, y, config=TrainConfig(), class_count=None, stages=DEFAULT_STAGES):
    """Train on raw ``(m, L)`` sample blocks with seeded mini-batch SGD."""
    X = np.asarray(X_raw, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInputError("no training data")
    k = int(class_count if class_count is not None else y.max() + 1)
    model = CnnModel.initialise(X.shape[1], k, np.random.default_rng([config.seed, 0]), stages)
    rng = np.random.default_rng([config.seed, 1])
    rate = config.rate(CNN_LEARNING_RATE)
    params = model.params()
    for _ in range(config.steps(NETWORK_EPOCHS)):
        order = rng.permutation(X.shape[0])
        total = 0.0
        for s in range(0, order.size, config.batch_size):
            idx = order[s:s + config.batch_size]
            loss, grads = cnn_loss_grad(model, X[idx], y[idx])
            total += loss * idx.size
            for p, g in zip(params, grads):
                p -= rate * g
        model.history.append(total / X.shape[0])
    return model
