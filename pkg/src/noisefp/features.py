"""Log-magnitude spectral features.

A 4096-sample (noise) segment maps to ``log(|FFT|+1)`` over the 2049
non-redundant bins of a real transform.  Feature matrices keep one vector per
row in memory; on disk (``ADFM``) the same bytes are read as a 2049 x m
column-major matrix, one column per segment.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .corpus import SEGMENT_LENGTH
from .errors import DomainError, EmptyInputError, FormatError, NumericError, ShapeError
from .wavelets import DenoiseConfig, extract_noise, passthrough

FEATURE_DIM = SEGMENT_LENGTH // 2 + 1
MODES = ("noise", "raw")

ADFM_MAGIC = b"ADFM"
ADFM_VERSION = 1
_ADFM_HEADER = struct.Struct("<4sIII")


def rfft_mag(segment):
    """|X_k| for k = 0..N/2 of a real length-4096 input (last axis)."""
    x = np.asarray(segment, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] != SEGMENT_LENGTH:
        raise ShapeError(f"expected {SEGMENT_LENGTH} samples, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NumericError("segment contains non-finite values")
    return np.abs(np.fft.rfft(x, axis=-1))


def lognorm(mags):
    mags = np.asarray(mags, dtype=np.float64)
    if np.any(mags < 0):
        raise DomainError("log normalisation needs non-negative magnitudes")
    return np.log1p(mags)


def _source(x, mode, config):
    if mode == "noise":
        return extract_noise(x, config)
    if mode == "raw":
        return passthrough(x)
    raise ValueError(f"feature mode must be one of {MODES}, got {mode!r}")


def featurize_samples(x, mode="noise", config=DenoiseConfig()):
    """Feature vector(s) for raw sample array(s) of shape (..., 4096)."""
    return lognorm(rfft_mag(_source(np.asarray(x, dtype=np.float64), mode, config)))


@dataclass
class FeatureVector:
    values: np.ndarray
    device_label: int


def featurize(segment, mode="noise", config=DenoiseConfig()):
    return FeatureVector(featurize_samples(segment.samples, mode, config), segment.device_label)


@dataclass
class FeatureMatrix:
    """``values`` is (m, 2049): row i is the feature vector of segment i."""

    values: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.values.ndim != 2 or self.values.shape[0] != self.labels.shape[0]:
            raise ShapeError(f"{self.values.shape} values vs {self.labels.shape} labels")
        if self.labels.size and self.labels.min() < 0:
            raise ShapeError("labels must be non-negative")

    def __len__(self):
        return self.labels.size

    @property
    def dim(self):
        return self.values.shape[1]

    def vectors(self):
        return [FeatureVector(v, int(y)) for v, y in zip(self.values, self.labels)]


def build_matrix(segments, mode="noise", config=DenoiseConfig(), chunk=512):
    """Featurise a list of segments in order, ``chunk`` at a time."""
    if len(segments) == 0:
        raise EmptyInputError("no segments to featurise")
    out = np.empty((len(segments), FEATURE_DIM))
    for i in range(0, len(segments), chunk):
        block = np.stack([s.samples for s in segments[i:i + chunk]])
        out[i:i + block.shape[0]] = featurize_samples(block, mode, config)
    return FeatureMatrix(out, [s.device_label for s in segments])


def global_histogram(matrix):
    """Sum of feature vectors over all segments (a diagnostic summary only)."""
    return matrix.values.sum(axis=0)


# ---- file formats ----------------------------------------------------------

def save_matrix(matrix, path):
    """Write ``ADFM``: magic, u32 version, u32 rows (=dim), u32 cols (=m),
    u16 labels[m], then float64 values column-major, all little-endian."""
    if matrix.labels.size and matrix.labels.max() > 0xFFFF:
        raise ValueError("labels must fit in 16 bits")
    with open(path, "wb") as fh:
        fh.write(_ADFM_HEADER.pack(ADFM_MAGIC, ADFM_VERSION, matrix.dim, len(matrix)))
        fh.write(matrix.labels.astype("<u2").tobytes())
        fh.write(np.ascontiguousarray(matrix.values, dtype="<f8").tobytes())


def load_matrix(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _ADFM_HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, rows, cols = _ADFM_HEADER.unpack_from(data)
    if magic != ADFM_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != ADFM_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    off = _ADFM_HEADER.size
    need = off + 2 * cols + 8 * rows * cols
    if len(data) != need:
        raise FormatError(f"{path}: expected {need} bytes, found {len(data)}")
    labels = np.frombuffer(data, "<u2", cols, off).astype(np.int64)
    values = np.frombuffer(data, "<f8", rows * cols, off + 2 * cols).reshape(cols, rows)
    return FeatureMatrix(values.copy(), labels)


def export_csv(matrix, path):
    """One row per vector: f0..f2048 then label."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{i}" for i in range(matrix.dim)] + ["label"])
        for v, y in zip(matrix.values, matrix.labels):
            w.writerow([repr(float(a)) for a in v] + [int(y)])
