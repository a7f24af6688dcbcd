"""How far apart are the devices in feature space?

Averages noise-mode feature vectors per device over a small synthetic
corpus and prints the pairwise distances of the means against the spread
of single segments around their own device mean.
"""

import tempfile

import numpy as np

from noisefp.corpus import CorpusSpec, manifest_segments, synth_corpus
from noisefp.features import build_matrix

spec = CorpusSpec(device_count=4, duration_s=8.0, train_segments_per_recording=60,
                  test_segments_per_recording=20, seed=3)

with tempfile.TemporaryDirectory() as tmp:
    manifest = synth_corpus(spec, tmp)
    for mode in ("noise", "raw"):
        m = build_matrix(manifest_segments(manifest, spec, "train"), mode)
        means = np.stack([m.values[m.labels == d].mean(axis=0) for d in range(spec.device_count)])
        spread = np.mean([np.linalg.norm(m.values[m.labels == d] - means[d], axis=1).mean()
                          for d in range(spec.device_count)])
        dist = np.linalg.norm(means[:, None] - means[None], axis=2)
        off = dist[np.triu_indices(spec.device_count, 1)]
        print(f"{mode:5s}: mean-to-mean distance min {off.min():.1f} max {off.max():.1f}; "
              f"segment spread {spread:.1f}; ratio {off.min() / spread:.2f}")
