import numpy as np
import pytest
from gradcheck import sampled_gradient_error

from noisefp.errors import ShapeError
from noisefp.learn import CnnModel, TrainConfig, cnn_classify, cnn_loss_grad, cnn_predict, cnn_train

MINI = ((2, 5, 2, 2), (3, 3, 1, 2))


def test_shape_trace():
    model = CnnModel.initialise(4096, 9, np.random.default_rng(0))
    assert model.shape_trace() == [(4096, 1), (1022, 16), (255, 16), (124, 32), (31, 32), (9,)]
    assert model.dense_w.shape == (31 * 32, 9)


def test_zero_parameters_uniform():
    model = CnnModel.initialise(4096, 9, np.random.default_rng(1))
    for p in model.params():
        p[...] = 0
    np.testing.assert_allclose(cnn_predict(model, np.random.default_rng(2).random(4096)), 1 / 9, atol=1e-15)


def test_probabilities_on_simplex():
    model = CnnModel.initialise(4096, 9, np.random.default_rng(3))
    P = cnn_predict(model, np.random.default_rng(4).uniform(-1, 1, (5, 4096)))
    assert P.shape == (5, 9) and np.all(P > 0)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)


def test_conv_matches_direct_loop():
    rng = np.random.default_rng(5)
    model = CnnModel.initialise(64, 3, rng, stages=MINI)
    x = rng.normal(size=64)
    # stage 1 by hand: strided valid convolution, ReLU, non-overlapping max-pool
    st = model.stages[0]
    conv_len, pooled_len = st.output_length(64)
    z = np.array([[np.dot(st.filters[f, 0], x[i * st.stride:i * st.stride + st.width]) + st.bias[f]
                   for i in range(conv_len)] for f in range(st.filters.shape[0])])
    a = np.maximum(z, 0)[:, :pooled_len * st.pool].reshape(st.filters.shape[0], pooled_len, st.pool).max(axis=2)
    st2 = model.stages[1]
    conv2, pooled2 = st2.output_length(pooled_len)
    z2 = np.array([[np.sum(st2.filters[f] * a[:, i * st2.stride:i * st2.stride + st2.width]) + st2.bias[f]
                    for i in range(conv2)] for f in range(st2.filters.shape[0])])
    a2 = np.maximum(z2, 0)[:, :pooled2 * st2.pool].reshape(-1, pooled2, st2.pool).max(axis=2)
    logits = a2.reshape(-1) @ model.dense_w + model.dense_b  # channel-major flatten
    p = np.exp(logits - logits.max())
    np.testing.assert_allclose(cnn_predict(model, x), p / p.sum(), atol=1e-12)


def test_gradient_finite_differences():
    rng = np.random.default_rng(6)
    model = CnnModel.initialise(64, 3, rng, stages=MINI)
    X, y = rng.normal(size=(4, 64)), rng.integers(0, 3, 4)
    _, grads = cnn_loss_grad(model, X, y)
    err = sampled_gradient_error(lambda: cnn_loss_grad(model, X, y)[0], model.params(), grads, h=1e-6)
    assert err < 1e-4


def test_wrong_length():
    model = CnnModel.initialise(4096, 9, np.random.default_rng(7))
    with pytest.raises(ShapeError):
        cnn_predict(model, np.zeros(4000))


def test_training_learns_and_is_deterministic():
    rng = np.random.default_rng(8)
    n = np.arange(256)
    y = np.arange(60) % 3
    X = np.sin(2 * np.pi * (y[:, None] + 1) * 8 * n / 256) + 0.1 * rng.normal(size=(60, 256))
    cfg = TrainConfig(epochs=15, batch_size=10, seed=3)
    a = cnn_train(X, y, cfg, stages=((4, 9, 2, 2), (4, 5, 1, 2)))
    b = cnn_train(X, y, cfg, stages=((4, 9, 2, 2), (4, 5, 1, 2)))
    assert all(p.tobytes() == q.tobytes() for p, q in zip(a.params(), b.params()))
    assert a.history[-1] < a.history[0]
    assert (cnn_classify(a, X) == y).mean() > 0.9
