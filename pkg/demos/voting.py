"""Voting over independent segment draws.

Each voter sees a different random 4096-sample segment of the same test
recording; the majority of their argmax votes is the decision.  V=1 is
exactly the single-model score.
"""

import tempfile

from noisefp.corpus import CorpusSpec, synth_corpus
from noisefp.experiment import ExperimentConfig, evaluate_model, prepare, train_model, vote_evaluate
from noisefp.learn import vote

print("votes [2, 2, 5] ->", vote([[0, 0, .9, 0, 0, .1], [0, 0, .6, 0, 0, .4], [0, 0, .2, 0, 0, .8]]))
print("tie 1 vs 0 broken by probability mass ->", vote([[.3, .7], [.9, .1]]))

spec = CorpusSpec(device_count=5, duration_s=20.0, train_segments_per_recording=200,
                  test_segments_per_recording=40, seed=4)
cfg = ExperimentConfig(corpus=spec, feature_mode="raw", classifier="mlp", mlp_hidden_layers=1)

with tempfile.TemporaryDirectory() as tmp:
    manifest = synth_corpus(spec, tmp)
    model = train_model(*prepare(manifest, cfg, "train"), cfg)
    print(f"single model: {evaluate_model(model, *prepare(manifest, cfg, 'test')).accuracy:.3f}")
    for v in (1, 3, 5):
        print(f"V={v}: {vote_evaluate(model, manifest, cfg, v).accuracy:.3f}")
