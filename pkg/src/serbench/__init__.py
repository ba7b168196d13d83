"""Speech emotion recognition benchmark engine.

Waveform augmentation, Mel filterbank features, four sequence classifiers
built on a small tape-based autodiff core, and a grouped k-fold evaluation
harness with CSV/JSON/figure reports.
"""

__version__ = "0.1.0"

from .audio import Waveform, load_wav, save_wav
from .features import FeatureMatrix, MelConfig, extract
from .manifest import ManifestRecord, load_manifest, save_manifest

__all__ = [
    "Waveform",
    "load_wav",
    "save_wav",
    "FeatureMatrix",
    "MelConfig",
    "extract",
    "ManifestRecord",
    "load_manifest",
    "save_manifest",
]
