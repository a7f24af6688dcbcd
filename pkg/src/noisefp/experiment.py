"""End-to-end experiment pipeline shared by the CLI and the acceptance suite.

One :class:`ExperimentConfig` captures every axis of the comparison grid:
feature mode (noise residual or raw recording), classifier family, depth,
chunked first layer, and voter count.  All randomness flows from the seeds
inside the config, so every step is reproducible.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import CorpusSpec, manifest_segments, stack_segments
from .errors import ConfigError, EmptyInputError, ShapeError
from .features import FEATURE_DIM, MODES, FeatureMatrix, build_matrix, featurize_samples, load_matrix, save_matrix
from .learn import (
    TrainConfig,
    cnn_train,
    load_model,
    mlp_train,
    mlp_train_averaged,
    predict,
    predict_proba,
    save_model,
    softmax_train,
    vote_batch,
)
from .learn.cnn import CnnModel
from .learn.config import HIDDEN_WIDTH
from .metrics import evaluate, export_report, report_from_predictions
from .wavelets import DenoiseConfig

log = logging.getLogger(__name__)

CLASSIFIERS = ("softmax", "mlp", "mlp-averaged", "cnn")


@dataclass
class ExperimentConfig:
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    denoise: DenoiseConfig = field(default_factory=DenoiseConfig)
    feature_mode: str = "noise"
    classifier: str = "mlp"
    mlp_hidden_layers: int = 3
    hidden_width: int = HIDDEN_WIDTH
    chunk_count: int = 4
    voters: int = 1
    train: TrainConfig = field(default_factory=TrainConfig)
    output_dir: str = "out"

    def __post_init__(self):
        if self.feature_mode not in MODES:
            raise ConfigError(f"feature_mode must be one of {MODES}, got {self.feature_mode!r}")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(f"classifier must be one of {CLASSIFIERS}, got {self.classifier!r}")
        if not 1 <= self.mlp_hidden_layers <= 3:
            raise ConfigError(f"mlp_hidden_layers must be 1..3, got {self.mlp_hidden_layers}")
        if self.voters < 1:
            raise ConfigError(f"voters must be >= 1, got {self.voters}")
        if self.chunk_count < 2:
            raise ConfigError(f"chunk_count must be >= 2, got {self.chunk_count}")

    @property
    def input_mode(self):
        """The CNN always consumes raw samples; other models use features."""
        return "samples" if self.classifier == "cnn" else self.feature_mode

    def layer_sizes(self, class_count):
        return [FEATURE_DIM] + [self.hidden_width] * self.mlp_hidden_layers + [class_count]

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    # ---- (de)serialisation -------------------------------------------------

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        nested = {"corpus": CorpusSpec, "denoise": DenoiseConfig, "train": TrainConfig}
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, typ in nested.items():
            if key in data and isinstance(data[key], dict):
                sub_known = {f.name for f in dataclasses.fields(typ)}
                bad = set(data[key]) - sub_known
                if bad:
                    raise ConfigError(f"unknown {key} keys: {sorted(bad)}")
                data[key] = typ(**data[key])
        return cls(**data)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---- data preparation ------------------------------------------------------

def prepare(manifest, config, role, draw=0):
    """Model inputs and labels for one role of a manifest.

    Returns a FeatureMatrix-like ``(X, y)``: 2049-dim features, or raw
    (n, 4096) sample blocks when the classifier is the CNN.
    """
    segments = manifest_segments(manifest, config.corpus, role, draw)
    if config.input_mode == "samples":
        return stack_segments(segments)
    m = build_matrix(segments, config.feature_mode, config.denoise)
    return m.values, m.labels


def featurize_manifest(manifest, config, out_dir=None):
    """Train and test feature matrices; written as ADFM files if ``out_dir``."""
    mats = {}
    for role in ("train", "test"):
        segments = manifest_segments(manifest, config.corpus, role)
        mats[role] = build_matrix(segments, config.feature_mode, config.denoise)
        log.info("%s: %d %s segments featurised (%s mode)", manifest, len(segments), role, config.feature_mode)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for role, m in mats.items():
            save_matrix(m, out_dir / f"{role}_{config.feature_mode}.adfm")
    return mats["train"], mats["test"]


# ---- training / evaluation -------------------------------------------------

def train_model(X, y, config, class_count=None):
    """Fit the configured classifier on ``(X, y)``."""
    k = int(class_count or config.corpus.device_count)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInputError("no training data")
    if config.classifier == "cnn":
        return cnn_train(X, y, config.train, class_count=k)
    if X.shape[1] != FEATURE_DIM:
        raise ShapeError(f"feature vectors have {X.shape[1]} dims, expected {FEATURE_DIM}")
    if config.classifier == "softmax":
        return softmax_train(X, y, config.train, class_count=k)
    sizes = config.layer_sizes(k)
    if config.classifier == "mlp":
        return mlp_train(X, y, sizes, config.train)
    return mlp_train_averaged(X, y, config.chunk_count, sizes, config.train)


def final_training_loss(model):
    return float(model.history[-1]) if getattr(model, "history", None) else float("nan")


def model_input_dim(model):
    if isinstance(model, CnnModel):
        return model.input_length
    return model.input_dim


def check_dims(model, X):
    want, got = model_input_dim(model), np.shape(X)[-1]
    if want != got:
        raise ShapeError(f"model expects inputs of dimension {want}, test data has dimension {got}")


def evaluate_model(model, X, y):
    check_dims(model, X)
    return evaluate(lambda A: predict(model, A), X, y, class_count=model.class_count)


def vote_evaluate(model, manifest, config, voters):
    """Voted accuracy over test trials.

    Trial t of a test recording pools segment t of ``voters`` independent
    segment draws (draw 0 is the ordinary test draw), so ``voters=1``
    reproduces :func:`evaluate_model` on the same seeds.
    """
    if voters < 1:
        raise ConfigError(f"voters must be >= 1, got {voters}")
    probs, labels = [], None
    for v in range(voters):
        X, y = prepare(manifest, config, "test", draw=v)
        check_dims(model, X)
        probs.append(predict_proba(model, X))
        labels = y
    votes = vote_batch(np.stack(probs))
    return report_from_predictions(labels, votes, model.class_count)


# ---- grid ------------------------------------------------------------------

GRID_COLUMNS = ("name", "table", "classifier", "hidden_layers", "feature_mode", "averaged", "voters", "accuracy")


def grid_rows(voter_counts=(1, 3, 4, 5), include_cnn=True):
    """The experiment grid as (table, config changes, voters) tuples.

    Table II holds the noise-feature rows, III the raw-feature rows (plus
    the CNN on raw samples), IV the chunked-input MLPs and V the voting
    runs of the three-layer noise MLP.
    """
    rows = []
    for mode in ("noise", "raw"):
        table = "II" if mode == "noise" else "III"
        rows.append((table, dict(classifier="softmax", feature_mode=mode), 1))
        for h in (1, 2, 3):
            rows.append((table, dict(classifier="mlp", feature_mode=mode, mlp_hidden_layers=h), 1))
    if include_cnn:
        rows.append(("III", dict(classifier="cnn", feature_mode="raw"), 1))
    for h in (1, 2, 3):
        rows.append(("IV", dict(classifier="mlp-averaged", feature_mode="noise", mlp_hidden_layers=h), 1))
    for v in voter_counts:
        rows.append(("V", dict(classifier="mlp", feature_mode="noise", mlp_hidden_layers=3), v))
    return rows


def row_name(changes, voters=None):
    """``mlp3-noise``, ``softmax-raw``...; voting rows add ``-vote<V>``."""
    c = changes["classifier"]
    name = c if c in ("softmax", "cnn") else f"{c}{changes['mlp_hidden_layers']}"
    name = f"{name}-{changes['feature_mode']}"
    return name if voters is None else f"{name}-vote{voters}"


def run_grid(manifest, config, out_dir, voter_counts=(1, 3, 4, 5), include_cnn=True):
    """Train and score every grid configuration; returns the summary rows.

    Writes ``grid.csv`` plus one ADID file per trained model into ``out_dir``.
    Models and features are shared between rows that differ only in voters.
    """
    out_dir = Path(out_dir)
    (out_dir / "models").mkdir(parents=True, exist_ok=True)
    data, models, results = {}, {}, []
    for table, changes, voters in grid_rows(voter_counts, include_cnn):
        cfg = config.replace(**changes)
        key = row_name(changes)
        if key not in models:
            if cfg.input_mode not in data:
                data[cfg.input_mode] = (prepare(manifest, cfg, "train"), prepare(manifest, cfg, "test"))
            (Xtr, ytr), _ = data[cfg.input_mode]
            models[key] = train_model(Xtr, ytr, cfg)
            save_model(models[key], out_dir / "models" / f"{key}.adid")
            log.info("trained %s (final loss %.6g)", key, final_training_loss(models[key]))
        model = models[key]
        if voters == 1:
            _, (Xte, yte) = data[cfg.input_mode]
            acc = evaluate_model(model, Xte, yte).accuracy
        else:
            acc = vote_evaluate(model, manifest, cfg, voters).accuracy
        results.append(dict(name=row_name(changes, voters if table == "V" else None), table=table, classifier=cfg.classifier,
                            hidden_layers=cfg.mlp_hidden_layers if "mlp" in cfg.classifier else "",
                            feature_mode=cfg.input_mode if cfg.classifier == "cnn" else cfg.feature_mode,
                            averaged=int(cfg.classifier == "mlp-averaged"), voters=voters, accuracy=acc))
        log.info("%s: accuracy %.4f", results[-1]["name"], acc)
    write_grid_csv(results, out_dir / "grid.csv")
    return results


def write_grid_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, GRID_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "accuracy": f"{r['accuracy']:.6f}"})


def read_grid_csv(path):
    with open(path, encoding="utf-8") as fh:
        return {r["name"]: float(r["accuracy"]) for r in csv.DictReader(fh)}


def save_report(report, out_dir, name):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return export_report(report, out_dir / f"{name}_metrics.csv")


def load_features(path):
    return load_matrix(path)


__all__ = [
    "ExperimentConfig",
    "FeatureMatrix",
    "evaluate_model",
    "featurize_manifest",
    "featurize_samples",
    "load_features",
    "load_model",
    "prepare",
    "read_grid_csv",
    "run_grid",
    "save_report",
    "train_model",
    "vote_evaluate",
]
