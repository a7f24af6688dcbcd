"""Recording-device identification from background-noise fingerprints.

Pipeline: cut fixed 4096-sample segments, strip the speech estimate with
wavelet shrinkage, take ``log(|FFT| + 1)`` of the residual, then classify
with softmax regression, sigmoid MLPs, a small 1-D CNN, or a vote over
several independently drawn segments.
"""

from .corpus import CorpusSpec, Recording, Segment, load_wav, segment_recording, synth_corpus, write_wav
from .features import FEATURE_DIM, FeatureMatrix, build_matrix, featurize, lognorm, rfft_mag
from .learn import TrainConfig, load_model, save_model, vote
from .metrics import EvalReport, evaluate, normalize_confusion
from .wavelets import DenoiseConfig, denoise, dwt, extract_noise, idwt, passthrough

__version__ = "0.1.0"
