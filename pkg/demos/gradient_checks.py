"""Analytic gradients of every learner against central finite differences."""

import numpy as np

from noisefp.learn import (
    ChunkedMlpModel, CnnModel, MlpModel, SoftmaxModel,
    chunked_loss_grad, cnn_loss_grad, mlp_loss_grad, one_hot, softmax_cost_grad,
)


def worst_error(loss, params, grads, coords=50, h=1e-5, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(coords):
        i = rng.integers(len(params))
        j = rng.integers(params[i].size)
        flat = params[i].reshape(-1)
        old = flat[j]
        flat[j] = old + h
        up = loss()
        flat[j] = old - h
        down = loss()
        flat[j] = old
        num, ana = (up - down) / (2 * h), grads[i].reshape(-1)[j]
        worst = max(worst, abs(ana - num) / max(abs(ana) + abs(num), 1e-8))
    return worst


rng = np.random.default_rng(0)

sm = SoftmaxModel(rng.normal(0, 0.3, (4, 7)), lam=1e-2)
X, y = rng.normal(size=(20, 6)), rng.integers(0, 4, 20)
g = softmax_cost_grad(sm, X, y)[1]
print("softmax      ", worst_error(lambda: softmax_cost_grad(sm, X, y)[0], [sm.theta], [g]))

mlp = MlpModel.initialise([6, 5, 4, 3], rng)
X, Y = rng.normal(size=(8, 6)), one_hot(rng.integers(0, 3, 8), 3)
g = mlp_loss_grad(mlp, X, Y)[1]
print("mlp          ", worst_error(lambda: mlp_loss_grad(mlp, X, Y)[0], mlp.params(), g))

avg = ChunkedMlpModel.initialise([10, 6, 4, 3], 3, rng)
X, Y = rng.normal(size=(8, 10)), one_hot(rng.integers(0, 3, 8), 3)
g = chunked_loss_grad(avg, X, Y)[1]
print("mlp-averaged ", worst_error(lambda: chunked_loss_grad(avg, X, Y)[0], avg.params(), g))

cnn = CnnModel.initialise(64, 3, rng, stages=((2, 5, 2, 2), (3, 3, 1, 2)))
X, y = rng.normal(size=(4, 64)), rng.integers(0, 3, 4)
g = cnn_loss_grad(cnn, X, y)[1]
print("cnn (mini)   ", worst_error(lambda: cnn_loss_grad(cnn, X, y)[0], cnn.params(), g, h=1e-6))
