import struct
import zlib

import numpy as np
import pytest

from noisefp.errors import FormatError, TruncatedFileError, TypeTagError
from noisefp.learn import ChunkedMlpModel, CnnModel, MlpModel, SoftmaxModel, load_model, save_model
from noisefp.learn.io import dumps, loads


def models():
    rng = np.random.default_rng(0)
    return {
        "softmax": SoftmaxModel(rng.normal(size=(9, 2050)), 1e-4),
        "mlp": MlpModel.initialise([2049, 16, 8, 9], rng),
        "mlp-averaged": ChunkedMlpModel.initialise([2049, 10, 5, 9], 4, rng),
        "cnn": CnnModel.initialise(4096, 9, rng),
    }


@pytest.mark.parametrize("kind", ["softmax", "mlp", "mlp-averaged", "cnn"])
def test_round_trip(tmp_path, kind):
    model = models()[kind]
    path = tmp_path / "m.adid"
    save_model(model, path)
    back = load_model(path, expect=kind)
    assert type(back) is type(model)
    if kind == "softmax":
        pairs = [(model.theta, back.theta)]
        assert back.lam == model.lam
    else:
        pairs = list(zip(model.params(), back.params()))
    for a, b in pairs:
        assert a.shape == b.shape and a.tobytes() == b.tobytes()
    assert dumps(back) == path.read_bytes()


def test_header_layout():
    data = dumps(models()["mlp"])
    magic, version, tag, k, n = struct.unpack_from("<4sIBII", data)
    assert (magic, version, tag, k, n) == (b"ADID", 1, 1, 9, 4)
    assert struct.unpack_from("<4I", data, 17) == (2049, 16, 8, 9)
    assert struct.unpack("<I", data[-4:])[0] == zlib.crc32(data[:-4])


def test_bad_magic_version_crc(tmp_path):
    data = dumps(models()["softmax"])
    with pytest.raises(FormatError):
        loads(b"XDID" + data[4:])
    with pytest.raises(FormatError):
        loads(data[:4] + struct.pack("<I", 9) + data[8:])
    flipped = bytearray(data)
    flipped[100] ^= 1
    with pytest.raises(FormatError):
        loads(bytes(flipped))


def test_truncated(tmp_path):
    path = tmp_path / "t.adid"
    path.write_bytes(dumps(models()["softmax"])[:1000])
    with pytest.raises(TruncatedFileError):
        load_model(path)
    with pytest.raises(OSError):
        load_model(path)


def test_type_tag_mismatch(tmp_path):
    path = tmp_path / "s.adid"
    save_model(models()["softmax"], path)
    with pytest.raises(TypeTagError):
        load_model(path, expect="mlp")
