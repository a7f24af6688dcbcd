"""Recordings, fixed-length segments and the synthetic multi-device corpus.

Real device recordings are read from 16-bit PCM WAV files.  Labels never come
from file content: a tab-separated manifest maps each file to its device id
and to its role (``train`` or ``test``).

The synthetic corpus stands in for a set of physical recorders.  Every file
carries speech-like content drawn from one shared generator plus a noise
floor that is specific to its device: seeded white noise pushed through a
per-device two-pole/two-zero coloration filter at a per-device gain.
"""

from __future__ import annotations

import logging
import os
import wave
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .errors import ConfigError, EmptyInputError, FormatError, TooShortError, UnsupportedFormatError

log = logging.getLogger(__name__)

SEGMENT_LENGTH = 4096
PCM_SCALE = 32768.0
SYNTH_SAMPLE_RATE = 16000
MANIFEST_NAME = "manifest.tsv"
ROLES = ("train", "test")

# synthetic device model; angles as fractions of pi
POLE_BAND = (0.05, 0.95)
NOISE_GAIN = (0.0007, 0.005)
SPEECH_TILT_DB = 24.0
POLE_RADIUS = (0.80, 0.90)
ZERO_RADIUS = (0.70, 0.90)


@dataclass
class Recording:
    samples: np.ndarray
    sample_rate: int
    device_label: int
    source_name: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise EmptyInputError(f"recording {self.source_name!r} has no samples")
        if not np.all(np.isfinite(self.samples)) or np.max(np.abs(self.samples)) > 1.0:
            raise ValueError(f"recording {self.source_name!r} has samples outside [-1, 1]")
        if self.sample_rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        if self.device_label < 0:
            raise ValueError(f"device label must be >= 0, got {self.device_label}")

    def __len__(self):
        return self.samples.size


@dataclass
class Segment:
    samples: np.ndarray
    device_label: int
    origin_offset: int

    def __post_init__(self):
        if np.shape(self.samples) != (SEGMENT_LENGTH,):
            raise ValueError(f"segment must have {SEGMENT_LENGTH} samples, got {np.shape(self.samples)}")


@dataclass(frozen=True)
class CorpusSpec:
    """Corpus layout.  Defaults give 18000 training and 900 test segments."""

    device_count: int = 9
    train_segments_per_recording: int = 1000
    test_segments_per_recording: int = 100
    recordings_per_device_train: int = 2
    recordings_per_device_test: int = 1
    seed: int = 0
    duration_s: float = 360.0
    sample_rate: int = SYNTH_SAMPLE_RATE

    def __post_init__(self):
        for name in ("device_count", "train_segments_per_recording", "test_segments_per_recording",
                     "recordings_per_device_train", "recordings_per_device_test", "sample_rate"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.duration_s * self.sample_rate < SEGMENT_LENGTH:
            raise ConfigError("duration too short to hold a single segment")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")

    def segments_per_recording(self, role):
        return self.train_segments_per_recording if role == "train" else self.test_segments_per_recording

    @property
    def total_train(self):
        return self.device_count * self.recordings_per_device_train * self.train_segments_per_recording

    @property
    def total_test(self):
        return self.device_count * self.recordings_per_device_test * self.test_segments_per_recording


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    device_label: int
    role: str


# ---- WAV I/O ---------------------------------------------------------------

def load_wav(path, device_label=0, source_name=None):
    """Read a PCM16 WAV file into a :class:`Recording`.

    Samples are scaled by 1/32768; channel 0 is kept for multichannel input.
    The label is supplied by the caller (from a manifest), not read from file.
    """
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as w:
            nch, width, rate, nframes = w.getnchannels(), w.getsampwidth(), w.getframerate(), w.getnframes()
            if width != 2:
                raise UnsupportedFormatError(f"{path}: {8 * width}-bit samples, only 16-bit PCM is supported")
            raw = w.readframes(nframes)
    except wave.Error as exc:
        if "unknown format" in str(exc):
            raise UnsupportedFormatError(f"{path}: {exc}; only 16-bit PCM is supported") from exc
        raise FormatError(f"{path}: {exc}") from exc
    except EOFError as exc:
        raise FormatError(f"{path}: truncated header") from exc
    pcm = np.frombuffer(raw, dtype="<i2")
    if pcm.size == 0 or nframes == 0:
        raise EmptyInputError(f"{path}: empty data chunk")
    pcm = pcm[: (pcm.size // nch) * nch].reshape(-1, nch)[:, 0]
    return Recording(pcm / PCM_SCALE, rate, device_label, source_name or path.name)


def to_pcm16(samples):
    q = np.round(np.asarray(samples, dtype=np.float64) * PCM_SCALE)
    return np.clip(q, -32768, 32767).astype("<i2")


def write_wav(path, samples, sample_rate):
    """Write mono 16-bit PCM.  Inverse of :func:`load_wav` for PCM16 data."""
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(sample_rate))
        w.writeframes(to_pcm16(samples).tobytes())


# ---- segmentation ----------------------------------------------------------

def segment_offsets(length, count, seed):
    if count < 1:
        raise ValueError(f"segment count must be >= 1, got {count}")
    if length < SEGMENT_LENGTH:
        raise TooShortError(f"recording has {length} samples, need at least {SEGMENT_LENGTH}")
    rng = np.random.default_rng(seed)
    return rng.integers(0, length - SEGMENT_LENGTH, size=count, endpoint=True)


def segment_recording(rec, count, seed):
    """Cut ``count`` random 4096-sample windows out of ``rec``.

    Start offsets are uniform over every valid position and drawn with
    replacement, so windows may overlap.
    """
    offsets = segment_offsets(len(rec), count, seed)
    return [Segment(rec.samples[o:o + SEGMENT_LENGTH], rec.device_label, int(o)) for o in offsets]


def stack_segments(segments):
    """(n, 4096) sample block and label vector for a list of segments."""
    if not segments:
        raise EmptyInputError("no segments")
    return (np.stack([s.samples for s in segments]),
            np.array([s.device_label for s in segments], dtype=np.int64))


def recording_seed(seed, name, draw=0):
    """64-bit segmentation seed for one recording; ``draw`` indexes fresh resamplings."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(name.encode("utf-8")), int(draw)])
    return int(ss.generate_state(1, np.uint64)[0])


# ---- manifest --------------------------------------------------------------

def write_manifest(path, entries):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in entries:
            fh.write(f"{e.path}\t{e.device_label}\t{e.role}\n")


def read_manifest(path):
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[2] not in ROLES:
                raise FormatError(f"{path}:{lineno}: expected 'path<TAB>label<TAB>train|test'")
            try:
                label = int(parts[1])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: label {parts[1]!r} is not an integer") from None
            entries.append(ManifestEntry(parts[0], label, parts[2]))
    if not entries:
        raise EmptyInputError(f"manifest {path} lists no files")
    return entries


def load_manifest_recordings(manifest_path, role=None):
    """Load every recording named in a manifest, optionally one role only.

    Returns ``(entry, Recording)`` pairs in manifest order.
    """
    root = Path(manifest_path).parent
    out = []
    for e in read_manifest(manifest_path):
        if role is not None and e.role != role:
            continue
        p = root / e.path
        if not p.exists():
            raise FileNotFoundError(f"manifest entry not found: {p}")
        out.append((e, load_wav(p, e.device_label, e.path)))
    return out


def manifest_segments(manifest_path, spec, role, draw=0):
    """Segments of all ``role`` recordings, with per-file seeds from ``spec.seed``."""
    segments = []
    for entry, rec in load_manifest_recordings(manifest_path, role):
        seed = recording_seed(spec.seed, entry.path, draw)
        segments.extend(segment_recording(rec, spec.segments_per_recording(role), seed))
    if not segments:
        raise EmptyInputError(f"manifest {manifest_path} has no {role} recordings")
    return segments


# ---- synthetic corpus ------------------------------------------------------

def _seeded(seed, *key):
    return np.random.default_rng(np.random.SeedSequence([int(seed), *key]))


def device_filters(device_count, seed):
    """Per-device ``(b, a, gain)`` noise coloration.

    Device ``d`` gets a resonance near ``(d + 0.5) / K`` of the band in
    ``POLE_BAND`` and a notch near ``(2d mod K + 0.5) / K`` of the same band,
    each with a small seeded jitter, so spectral neighbours differ in their
    notch.  Gains are log-spaced over ``NOISE_GAIN`` in the order
    ``4d mod K``, so devices with nearby resonances also differ in level.
    ``b, a`` are scaled to unit output power for unit-variance white input.
    """
    rng = _seeded(seed, 0xD1CE)
    lo, hi = POLE_BAND
    g_lo, g_hi = NOISE_GAIN
    k = device_count
    out = []
    for d in range(k):
        pole_angle = np.pi * (lo + (hi - lo) * (d + 0.5 + rng.uniform(-0.05, 0.05)) / k)
        pole_r = rng.uniform(*POLE_RADIUS)
        zero_angle = np.pi * (lo + (hi - lo) * ((2 * d) % k + 0.5 + rng.uniform(-0.05, 0.05)) / k)
        zero_r = rng.uniform(*ZERO_RADIUS)
        b = np.array([1.0, -2 * zero_r * np.cos(zero_angle), zero_r**2])
        a = np.array([1.0, -2 * pole_r * np.cos(pole_angle), pole_r**2])
        _, h = sps.freqz(b, a, worN=4096)
        b = b / np.sqrt(np.mean(np.abs(h) ** 2))
        rank = (4 * d) % k / (k - 1) if k > 1 else 0.5
        out.append((b, a, g_lo * (g_hi / g_lo) ** rank))
    return out


def synth_speech(n, sample_rate, rng):
    """Speech-like content: voiced syllables of formant-weighted harmonics.

    Each syllable is a harmonic stack below 3.8 kHz with three random
    formants and a 24 dB/octave roll-off above 500 Hz, under a Hann envelope
    with slow amplitude modulation.  Short pauses are rare.
    """
    out = np.zeros(n)
    t0 = 0
    top = min(3800.0, 0.45 * sample_rate)
    while t0 < n:
        if rng.random() < 0.02:
            t0 += int(rng.uniform(0.05, 0.4) * sample_rate)
            continue
        length = min(int(rng.uniform(0.08, 0.35) * sample_rate), n - t0)
        f0 = rng.uniform(90.0, 260.0)
        harmonics = f0 * np.arange(1, int(top // f0) + 1)
        formants = (rng.uniform(300, 900), rng.uniform(900, 2400), rng.uniform(2400, 3500))
        amp = sum(np.exp(-0.5 * ((harmonics - f) / 180.0) ** 2) for f in formants) + 0.05
        amp *= 10.0 ** (-SPEECH_TILT_DB / 20.0 * np.log2(np.maximum(harmonics, 500.0) / 500.0))
        amp *= rng.uniform(0.2, 0.7) / np.sqrt(np.sum(amp**2))
        phase = rng.uniform(0, 2 * np.pi, harmonics.size)
        t = np.arange(length) / sample_rate
        tone = np.sin(2 * np.pi * harmonics[:, None] * t[None, :] + phase[:, None])
        env = np.hanning(length) * (1.0 + 0.3 * np.sin(2 * np.pi * rng.uniform(2, 6) * t))
        out[t0:t0 + length] += env * (amp @ tone)
        t0 += length
    return out


def synth_recording(device, index, spec, filters=None):
    """Samples for recording ``index`` of synthetic ``device`` (float, pre-quantisation)."""
    filters = filters or device_filters(spec.device_count, spec.seed)
    n = int(round(spec.duration_s * spec.sample_rate))
    speech = synth_speech(n, spec.sample_rate, _seeded(spec.seed, 1, device, index))
    noise = device_noise(device, index, spec, n, filters)
    return np.clip(speech + noise, -1.0, 32767 / PCM_SCALE)


def device_noise(device, index, spec, n, filters=None):
    """The background-noise component of recording ``index`` of ``device``.

    Seeded white noise through the device's coloration filter, at the device
    gain times a per-recording session factor in [0.9, 1.1].
    """
    filters = filters or device_filters(spec.device_count, spec.seed)
    b, a, gain = filters[device]
    rng = _seeded(spec.seed, 2, device, index)
    session_gain = gain * rng.uniform(0.9, 1.1)
    return sps.lfilter(b, a, rng.standard_normal(n)) * session_gain


def synth_corpus(spec, out_dir):
    """Write the synthetic corpus and its manifest; returns the manifest path.

    Output is a pure function of ``spec``: rerunning gives byte-identical files.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create corpus directory {out_dir}: {exc}") from exc
    if not os.access(out_dir, os.W_OK):
        raise OSError(f"corpus directory {out_dir} is not writable")
    filters = device_filters(spec.device_count, spec.seed)
    per_device = spec.recordings_per_device_train + spec.recordings_per_device_test
    entries = []
    for d in range(spec.device_count):
        for r in range(per_device):
            role = "train" if r < spec.recordings_per_device_train else "test"
            name = f"device{d:02d}_rec{r + 1}.wav"
            write_wav(out_dir / name, synth_recording(d, r, spec, filters), spec.sample_rate)
            entries.append(ManifestEntry(name, d, role))
            log.debug("wrote %s (device %d, %s)", name, d, role)
    manifest = out_dir / MANIFEST_NAME
    write_manifest(manifest, entries)
    log.info("synthesised %d recordings for %d devices in %s", len(entries), spec.device_count, out_dir)
    return manifest
