"""Split a synthetic recording segment into a speech estimate and a noise residual.

The residual is what the classifiers see in noise mode.  Its spectrum
follows the device filter, while the raw spectrum is dominated by the
speech harmonics.
"""

import numpy as np

from noisefp.corpus import CorpusSpec, device_filters, device_noise, synth_recording
from noisefp.features import featurize_samples
from noisefp.wavelets import dwt, extract_noise, mad_sigma, universal_threshold

spec = CorpusSpec(device_count=3, duration_s=2.0, seed=1)
filters = device_filters(spec.device_count, spec.seed)
samples = synth_recording(0, 0, spec, filters)
x = samples[:4096]

c = dwt(x)
sigma = mad_sigma(c.details[-1])
print(f"finest-band sigma {sigma:.3g}, threshold {universal_threshold(sigma, x.size):.3g}")

residual = extract_noise(x)
true_noise = device_noise(0, 0, spec, samples.size, filters)[:4096]
print(f"signal energy {np.sum(x**2):.4g}, residual energy {np.sum(residual**2):.4g}, "
      f"device-noise energy {np.sum(true_noise**2):.4g}")
print(f"correlation(residual, device noise) = {np.corrcoef(residual, true_noise)[0, 1]:.3f}")

raw, noise = featurize_samples(x, "raw"), featurize_samples(x, "noise")
ref = featurize_samples(true_noise, "raw")
for name, v in (("raw", raw), ("noise", noise)):
    print(f"{name:5s} features: distance to pure device-noise spectrum {np.linalg.norm(v - ref):.2f}")
