"""Train every feature-based classifier on a reduced corpus in both modes.

A smaller version of the comparison grid: softmax regression and sigmoid
MLPs with 1-3 hidden layers, each on noise residual features and on raw
recording features.
"""

import tempfile

from noisefp.corpus import CorpusSpec, synth_corpus
from noisefp.experiment import ExperimentConfig, evaluate_model, prepare, train_model

spec = CorpusSpec(device_count=5, duration_s=20.0, train_segments_per_recording=200,
                  test_segments_per_recording=40, seed=2)

with tempfile.TemporaryDirectory() as tmp:
    manifest = synth_corpus(spec, tmp)
    for mode in ("noise", "raw"):
        base = ExperimentConfig(corpus=spec, feature_mode=mode)
        (Xtr, ytr), (Xte, yte) = prepare(manifest, base, "train"), prepare(manifest, base, "test")
        for classifier, depth in (("softmax", 1), ("mlp", 1), ("mlp", 2), ("mlp", 3)):
            cfg = base.replace(classifier=classifier, mlp_hidden_layers=depth)
            model = train_model(Xtr, ytr, cfg)
            label = classifier if classifier == "softmax" else f"mlp{depth}"
            print(f"{mode:5s} {label:8s} test accuracy {evaluate_model(model, Xte, yte).accuracy:.3f}")
