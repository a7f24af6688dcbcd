"""``ADID`` model files.

Layout, all little-endian::

    b"ADID"  u32 version  u8 type  u32 K  u32 n  u32 sizes[n]
    f64 params...  u32 crc32(all preceding bytes)

Type tags and size lists:

    0 softmax       [D, K]                 theta (K x (D+1), row-major), lam
    1 mlp           [in, h1, ..., K]       W0 (row-major, in x out), b0, W1, b1, ...
    2 mlp-averaged  [C, chunk_start_0..C-1, chunk_width_0..C-1, D, h2.., K]
                                           per chunk W, b; then upper W, b pairs
    3 cnn           [L, S, (F, W, stride, pool) * S, K]
                                           per stage filters (F x C x W), bias; dense W, b
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from ..errors import FormatError, TruncatedFileError, TypeTagError
from .cnn import CnnModel, ConvStage
from .mlp import ChunkedMlpModel, MlpModel
from .softmax import SoftmaxModel

MAGIC = b"ADID"
VERSION = 1
TYPE_TAGS = {"softmax": 0, "mlp": 1, "mlp-averaged": 2, "cnn": 3}
_TAG_NAMES = {v: k for k, v in TYPE_TAGS.items()}


def model_type(model):
    if isinstance(model, SoftmaxModel):
        return "softmax"
    if isinstance(model, MlpModel):
        return "mlp"
    if isinstance(model, ChunkedMlpModel):
        return "mlp-averaged"
    if isinstance(model, CnnModel):
        return "cnn"
    raise TypeError(f"cannot serialise {type(model).__name__}")


def _layout(model):
    kind = model_type(model)
    if kind == "softmax":
        return kind, [model.input_dim, model.class_count], [model.theta, np.array([model.lam])]
    if kind == "mlp":
        return kind, model.layer_sizes, model.params()
    if kind == "mlp-averaged":
        starts = [lo for lo, _ in model.bounds]
        widths = [w.shape[1] for w in model.chunk_weights]
        sizes = [model.chunk_count, *starts, *widths, model.input_dim, *model.upper.layer_sizes[1:]]
        return kind, sizes, model.params()
    sizes = [model.input_length, len(model.stages)]
    for st in model.stages:
        sizes += [st.filters.shape[0], st.width, st.stride, st.pool]
    return kind, sizes + [model.class_count], model.params()


def dumps(model):
    kind, sizes, params = _layout(model)
    k = model.class_count
    head = struct.pack("<4sIBII", MAGIC, VERSION, TYPE_TAGS[kind], k, len(sizes))
    body = head + struct.pack(f"<{len(sizes)}I", *sizes)
    body += b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in params)
    return body + struct.pack("<I", zlib.crc32(body))


def save_model(model, path):
    with open(path, "wb") as fh:
        fh.write(dumps(model))


class _Reader:
    def __init__(self, data, limit):
        self.data, self.pos, self.limit = data, 0, limit

    def take(self, fmt):
        n = struct.calcsize(fmt)
        if self.pos + n > self.limit:
            raise TruncatedFileError("model file ends before its declared payload")
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += n
        return out

    def array(self, *shape):
        n = int(np.prod(shape))
        if self.pos + 8 * n > self.limit:
            raise TruncatedFileError("model file ends before its declared payload")
        a = np.frombuffer(self.data, "<f8", n, self.pos).reshape(shape).astype(np.float64)
        self.pos += 8 * n
        return a


def loads(data, expect=None):
    """Parse model bytes; ``expect`` (a type name) rejects other model types."""
    if len(data) < 4 or data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}, not a model file")
    if len(data) < 21:
        raise TruncatedFileError("model file shorter than its header")
    r = _Reader(data, len(data) - 4)
    _, version, tag, k, n = r.take("<4sIBII")
    if version != VERSION:
        raise FormatError(f"unsupported model file version {version}")
    if tag not in _TAG_NAMES:
        raise FormatError(f"unknown model type tag {tag}")
    kind = _TAG_NAMES[tag]
    if expect is not None and kind != expect:
        raise TypeTagError(f"file holds a {kind} model, expected {expect}")
    sizes = list(r.take(f"<{n}I"))
    if kind == "softmax":
        d, _ = sizes
        theta = r.array(k, d + 1)
        model = SoftmaxModel(theta, float(r.array(1)[0]))
    elif kind == "mlp":
        model = _read_mlp(r, sizes)
    elif kind == "mlp-averaged":
        c = sizes[0]
        starts, widths, rest = sizes[1:1 + c], sizes[1 + c:1 + 2 * c], sizes[1 + 2 * c:]
        bounds = list(zip(starts, starts[1:] + [rest[0]]))
        cw, cb = [], []
        for (lo, hi), w in zip(bounds, widths):
            cw.append(r.array(hi - lo, w))
            cb.append(r.array(w))
        model = ChunkedMlpModel(bounds, cw, cb, _read_mlp(r, [sum(widths)] + rest[1:]))
    else:
        length, s = sizes[:2]
        stages, c, cur = [], 1, length
        for i in range(s):
            f, w, stride, pool = sizes[2 + 4 * i:6 + 4 * i]
            st = ConvStage(r.array(f, c, w), r.array(f), stride, pool)
            stages.append(st)
            cur, c = st.output_length(cur)[1], f
        model = CnnModel(length, stages, r.array(cur * c, k), r.array(k))
    if r.pos != r.limit:
        raise FormatError(f"{r.limit - r.pos} unexpected bytes after parameters")
    (crc,) = struct.unpack_from("<I", data, r.limit)
    if crc != zlib.crc32(data[:r.limit]):
        raise FormatError("model file checksum mismatch")
    return model


def _read_mlp(r, sizes):
    ws, bs = [], []
    for a, b in zip(sizes[:-1], sizes[1:]):
        ws.append(r.array(a, b))
        bs.append(r.array(b))
    return MlpModel(ws, bs)


def load_model(path, expect=None):
    with open(path, "rb") as fh:
        return loads(fh.read(), expect)
