import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from noisefp.corpus import Segment
from noisefp.errors import DomainError, EmptyInputError, FormatError, NumericError, ShapeError
from noisefp.features import (
    FEATURE_DIM,
    FeatureMatrix,
    build_matrix,
    export_csv,
    featurize,
    featurize_samples,
    global_histogram,
    load_matrix,
    lognorm,
    rfft_mag,
    save_matrix,
)

N = 4096


def naive_dft_mag(x):
    """Direct O(N^2) evaluation of |sum_n x_n exp(-2 pi i k n / N)|, k <= N/2."""
    n = np.arange(x.size)
    k = np.arange(x.size // 2 + 1)[:, None]
    # reduce k*n mod N exactly in integers before forming the angle
    phase = 2.0 * np.pi * ((k * n) % x.size) / x.size
    return np.abs(np.cos(phase) @ x - 1j * (np.sin(phase) @ x))


def test_naive_dft_oracle():
    x = np.random.default_rng(0).standard_normal(N)
    np.testing.assert_allclose(rfft_mag(x), naive_dft_mag(x), rtol=0, atol=1e-9)


def test_zero_and_impulse():
    np.testing.assert_array_equal(rfft_mag(np.zeros(N)), np.zeros(FEATURE_DIM))
    x = np.zeros(N)
    x[0] = 1.0
    np.testing.assert_allclose(rfft_mag(x), 1.0, atol=1e-15)
    np.testing.assert_allclose(lognorm(rfft_mag(x)), np.log(2.0), atol=1e-15)


def test_cosine_bin():
    x = np.cos(2 * np.pi * 100 * np.arange(N) / N)
    m = rfft_mag(x)
    assert m[100] == pytest.approx(2048.0, abs=1e-9)
    assert np.max(np.delete(m, 100)) < 1e-9
    np.testing.assert_allclose(m, naive_dft_mag(x), atol=1e-9)


def test_parseval_full_spectrum():
    x = np.random.default_rng(1).standard_normal(N)
    m = rfft_mag(x)
    full = m[0] ** 2 + m[-1] ** 2 + 2 * np.sum(m[1:-1] ** 2)
    assert full == pytest.approx(N * np.sum(x**2), rel=1e-6)


def test_rfft_errors():
    with pytest.raises(ShapeError):
        rfft_mag(np.zeros(4095))
    with pytest.raises(NumericError):
        rfft_mag(np.r_[np.inf, np.zeros(N - 1)])


def test_lognorm_values():
    np.testing.assert_array_equal(lognorm(np.zeros(5)), np.zeros(5))
    assert lognorm(np.array([np.e - 1]))[0] == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        lognorm(np.array([0.5, -1e-12]))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 20, elements=st.floats(0, 1e12)))
def test_lognorm_monotone_nonnegative(v):
    out = lognorm(v)
    assert np.all(out >= 0)
    order = np.argsort(v, kind="stable")
    assert np.all(np.diff(out[order]) >= 0)


def test_featurize_modes():
    rng = np.random.default_rng(2)
    t = np.arange(N) / 16000
    x = 0.5 * np.sin(2 * np.pi * 220 * t) + 0.01 * rng.standard_normal(N)
    seg = Segment(x, 3, 0)
    raw = featurize(seg, "raw")
    noise = featurize(seg, "noise")
    assert raw.device_label == noise.device_label == 3
    np.testing.assert_array_equal(raw.values, lognorm(rfft_mag(x)))
    assert np.linalg.norm(raw.values - noise.values) > 0
    for mode in ("raw", "noise"):
        assert not featurize(Segment(np.zeros(N), 0, 0), mode).values.any()
    with pytest.raises(ValueError):
        featurize_samples(x, "spectrum")


def test_build_matrix_order_and_determinism():
    rng = np.random.default_rng(3)
    segs = [Segment(rng.uniform(-1, 1, N), i % 4, 0) for i in range(7)]
    m = build_matrix(segs, "noise", chunk=3)
    assert m.values.shape == (7, FEATURE_DIM) and m.dim == FEATURE_DIM
    assert list(m.labels) == [0, 1, 2, 3, 0, 1, 2]
    np.testing.assert_array_equal(m.values[5], featurize(segs[5]).values)
    assert build_matrix(segs, "noise").values.tobytes() == m.values.tobytes()
    one = build_matrix(segs[:1], "raw")
    assert one.values.shape == (1, FEATURE_DIM)
    with pytest.raises(EmptyInputError):
        build_matrix([])
    np.testing.assert_allclose(global_histogram(m), m.values.sum(axis=0))


def test_adfm_round_trip_and_layout(tmp_path):
    rng = np.random.default_rng(4)
    m = FeatureMatrix(rng.random((5, FEATURE_DIM)), [0, 8, 3, 3, 1])
    path = tmp_path / "x.adfm"
    save_matrix(m, path)
    back = load_matrix(path)
    np.testing.assert_array_equal(back.values, m.values)
    np.testing.assert_array_equal(back.labels, m.labels)
    data = path.read_bytes()
    assert data[:4] == b"ADFM"
    rows, cols = np.frombuffer(data, "<u4", 2, 8)
    assert (rows, cols) == (FEATURE_DIM, 5)
    # column-major 2049 x 5 matrix: column j is segment j
    body = np.frombuffer(data, "<f8", offset=16 + 2 * 5).reshape(FEATURE_DIM, 5, order="F")
    np.testing.assert_array_equal(body[:, 2], m.values[2])


def test_adfm_errors(tmp_path):
    m = FeatureMatrix(np.zeros((2, FEATURE_DIM)), [0, 1])
    path = tmp_path / "x.adfm"
    save_matrix(m, path)
    data = path.read_bytes()
    (tmp_path / "magic.adfm").write_bytes(b"XXXX" + data[4:])
    (tmp_path / "short.adfm").write_bytes(data[:-8])
    (tmp_path / "version.adfm").write_bytes(data[:4] + (2).to_bytes(4, "little") + data[8:])
    for name in ("magic", "short", "version"):
        with pytest.raises(FormatError):
            load_matrix(tmp_path / f"{name}.adfm")


def test_csv_export(tmp_path):
    m = FeatureMatrix(np.arange(2 * FEATURE_DIM, dtype=float).reshape(2, -1) / 7, [4, 2])
    path = tmp_path / "x.csv"
    export_csv(m, path)
    rows = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(rows[:, :-1], m.values)
    np.testing.assert_array_equal(rows[:, -1], [4, 2])
