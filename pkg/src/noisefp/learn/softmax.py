"""Multinomial logistic (softmax) regression with L2 weight decay.

Parameters are a ``K x (D+1)`` matrix, one row per class, with the bias in
the last column.  The cost is the mean negative log-likelihood plus
``lam/2`` times the squared norm of the non-bias weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import svds

from ..errors import EmptyInputError, ShapeError
from .config import SOFTMAX_EPOCHS, TrainConfig


@dataclass
class SoftmaxModel:
    theta: np.ndarray
    lam: float = 0.0
    history: list = field(default_factory=list, repr=False, compare=False)

    @property
    def class_count(self):
        return self.theta.shape[0]

    @property
    def input_dim(self):
        return self.theta.shape[1] - 1

    @classmethod
    def zeros(cls, input_dim, class_count, lam=0.0):
        return cls(np.zeros((class_count, input_dim + 1)), lam)


def _augment(X):
    return np.concatenate([X, np.ones(X.shape[:-1] + (1,))], axis=-1)


def _as_inputs(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != model.input_dim:
        raise ShapeError(f"model expects {model.input_dim} features, got {X.shape[-1]}")
    return X


def softmax_rows(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_predict(model, x):
    """Class probabilities for one vector ``(D,)`` or a batch ``(m, D)``."""
    x = _as_inputs(model, x)
    return softmax_rows(_augment(x) @ model.theta.T)


def softmax_classify(model, X):
    return np.argmax(softmax_predict(model, X), axis=-1)


def softmax_cost_grad(model, X, y):
    """Return ``(J, dJ/dtheta)`` for labels ``y`` in ``0..K-1``."""
    X = _as_inputs(model, X)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInputError("cost needs at least one sample")
    if y.shape != (X.shape[0],):
        raise ShapeError(f"{X.shape[0]} samples but {y.shape} labels")
    return _cost_grad(model.theta, model.lam, _augment(X), y)


def _cost_grad(theta, lam, Xa, y):
    m = Xa.shape[0]
    z = Xa @ theta.T
    z -= z.max(axis=1, keepdims=True)
    log_p = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    w = theta[:, :-1]
    cost = -log_p[np.arange(m), y].mean() + 0.5 * lam * np.sum(w * w)
    err = np.exp(log_p)
    err[np.arange(m), y] -= 1.0
    grad = err.T @ Xa / m
    grad[:, :-1] += lam * w
    return cost, grad


def safe_step(X, lam=0.0):
    """Step size ``1/L`` for full-batch descent on the softmax cost.

    The Hessian of the cost is bounded by ``0.5 * X~'X~/m`` per class (plus
    ``lam``), so ``L = 0.5 * sigma_max(X~)**2 / m + lam`` is a Lipschitz
    constant of the gradient and any step below ``2/L`` decreases the cost.
    """
    Xa = _augment(np.asarray(X, dtype=np.float64))
    if Xa.shape[0] == 0:
        raise EmptyInputError("no training data")
    if min(Xa.shape) < 2:
        sigma = np.linalg.norm(Xa, 2)
    else:
        sigma = svds(Xa, k=1, v0=np.ones(min(Xa.shape)), return_singular_vectors=False)[0]
    return 1.0 / (0.5 * sigma**2 / Xa.shape[0] + lam)


def softmax_train(X, y, config=TrainConfig(), class_count=None):
    """Full-batch gradient descent from zero parameters.

    Runs ``config.epochs`` steps (default 300) at ``config.learning_rate``,
    or at :func:`safe_step` when no rate is given.  The cost before each
    step is appended to ``model.history`` (the final cost is appended last).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInputError("no training data")
    k = int(class_count if class_count is not None else y.max() + 1)
    model = SoftmaxModel.zeros(X.shape[1], k, config.lam)
    if config.learning_rate is None:
        rate = safe_step(X, config.lam)
    else:
        rate = config.learning_rate
    Xa = _augment(X)
    for _ in range(config.steps(SOFTMAX_EPOCHS)):
        cost, grad = _cost_grad(model.theta, model.lam, Xa, y)
        model.history.append(cost)
        model.theta -= rate * grad
    model.history.append(_cost_grad(model.theta, model.lam, Xa, y)[0])
    return model
