"""Time-frequency frontend: framing, Mel filterbank, cepstra, SpecAug, normalization."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.fft import dct

from .audio import Waveform
from .errors import DataError
from .util import config_hash, stable_seed

log = logging.getLogger(__name__)

LOG_EPS = 1e-10


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@dataclass(frozen=True)
class MelConfig:
    """Frontend configuration. Defaults: 23 log-Mel bands, 5 ms window and shift."""

    n_mels: int = 23
    window_ms: float = 5.0
    shift_ms: float = 5.0
    fft_size: int | None = None  # next power of two >= window when None
    f_min: float = 0.0
    f_max: float | None = None  # Nyquist when None
    mode: str = "logmel"  # logmel | mfcc
    n_ceps: int | None = None  # mfcc mode; defaults to n_mels

    def __post_init__(self):
        if self.n_mels < 2:
            raise DataError(f"n_mels must be >= 2, got {self.n_mels}")
        if self.shift_ms <= 0 or self.shift_ms > self.window_ms:
            raise DataError("need 0 < shift_ms <= window_ms")
        if self.mode not in ("logmel", "mfcc"):
            raise DataError(f"mode must be logmel or mfcc, got {self.mode!r}")

    def window_samples(self, rate: int) -> int:
        return int(round(self.window_ms * rate / 1000.0))

    def shift_samples(self, rate: int) -> int:
        return int(round(self.shift_ms * rate / 1000.0))

    def fft_samples(self, rate: int) -> int:
        win = self.window_samples(rate)
        if self.fft_size is None:
            n = 1
            while n < win:
                n *= 2
            return n
        if self.fft_size < win or self.fft_size & (self.fft_size - 1):
            raise DataError(f"fft_size must be a power of two >= {win}")
        return self.fft_size

    def band_edges(self, rate: int) -> tuple[float, float]:
        f_max = rate / 2.0 if self.f_max is None else float(self.f_max)
        if not self.f_min < f_max <= rate / 2.0:
            raise DataError(f"need f_min < f_max <= Nyquist, got [{self.f_min}, {f_max}]")
        return float(self.f_min), f_max

    @property
    def out_dim(self) -> int:
        if self.mode == "mfcc":
            return self.n_ceps if self.n_ceps is not None else self.n_mels
        return self.n_mels

    def hash(self) -> str:
        return config_hash(
            {k: getattr(self, k) for k in (
                "n_mels", "window_ms", "shift_ms", "fft_size",
                "f_min", "f_max", "mode", "n_ceps",
            )}
        )


@dataclass(frozen=True)
class FeatureMatrix:
    """T x F feature values plus the frame shift and source utterance id."""

    values: np.ndarray
    frame_shift_ms: float
    source_id: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[0] < 1:
            raise DataError(f"feature matrix must be 2-D with T >= 1, got {values.shape}")
        if not np.isfinite(values).all():
            raise DataError("feature matrix contains NaN or Inf")

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_dims(self) -> int:
        return self.values.shape[1]


def frame(w: Waveform, cfg: MelConfig) -> np.ndarray:
    """Slice into Hann-windowed frames zero-padded to the FFT size, shape (T, fft)."""
    win = cfg.window_samples(w.sample_rate)
    shift = cfg.shift_samples(w.sample_rate)
    nfft = cfg.fft_samples(w.sample_rate)
    n = len(w)
    if n < win:
        raise DataError(f"utterance of {n} samples shorter than one {win}-sample window")
    n_frames = (n - win) // shift + 1
    idx = np.arange(win)[None, :] + shift * np.arange(n_frames)[:, None]
    frames = w.samples[idx] * np.hanning(win)[None, :]
    if nfft > win:
        frames = np.pad(frames, ((0, 0), (0, nfft - win)))
    return frames


def mel_filterbank_matrix(cfg: MelConfig, rate: int) -> np.ndarray:
    """Triangular filters on the Mel scale, shape (n_mels, fft/2 + 1).

    Centers are equally spaced in mel between f_min and f_max; triangles are
    evaluated at the FFT bin frequencies. Raises if any filter would catch
    no FFT bin at all (n_mels too large for the FFT resolution).
    """
    nfft = cfg.fft_samples(rate)
    f_min, f_max = cfg.band_edges(rate)
    n_bins = nfft // 2 + 1
    bin_freqs = np.arange(n_bins) * rate / nfft
    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), cfg.n_mels + 2))

    fb = np.zeros((cfg.n_mels, n_bins))
    for m in range(cfg.n_mels):
        left, center, right = edges[m], edges[m + 1], edges[m + 2]
        rising = (bin_freqs - left) / (center - left)
        falling = (right - bin_freqs) / (right - center)
        fb[m] = np.maximum(0.0, np.minimum(rising, falling))
        if fb[m].sum() <= 0.0:
            raise DataError(
                f"mel filter {m} (center {center:.1f} Hz) catches no FFT bin; "
                f"reduce n_mels or enlarge fft_size"
            )
    return fb


def filter_centers(cfg: MelConfig, rate: int) -> np.ndarray:
    """Center frequencies (Hz) of the triangular filters."""
    f_min, f_max = cfg.band_edges(rate)
    return mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), cfg.n_mels + 2))[1:-1]


def extract(w: Waveform, cfg: MelConfig = MelConfig(), source_id: str = "") -> FeatureMatrix:
    """Log-Mel filterbank features; in mfcc mode an orthonormal DCT-II follows."""
    frames = frame(w, cfg)
    power = np.abs(np.fft.rfft(frames, axis=1)) ** 2
    fb = mel_filterbank_matrix(cfg, w.sample_rate)
    values = np.log(power @ fb.T + LOG_EPS)
    if cfg.mode == "mfcc":
        n_ceps = cfg.n_ceps if cfg.n_ceps is not None else cfg.n_mels
        if not 1 <= n_ceps <= cfg.n_mels:
            raise DataError(f"n_ceps must be in [1, n_mels], got {n_ceps}")
        values = dct(values, type=2, norm="ortho", axis=1)[:, :n_ceps]
    return FeatureMatrix(values, cfg.shift_ms, source_id)


def time_mask(fm: FeatureMatrix, max_width: int, count: int, fill: float, seed: int) -> FeatureMatrix:
    """Set `count` random frame intervals to `fill`.

    Per mask the generator draws width ~ U[0, max_width] then start
    ~ U[0, T - width]; everything outside the masks is bit-identical.
    """
    t = fm.n_frames
    if max_width > t:
        raise DataError(f"time mask width {max_width} exceeds T={t}")
    rng = np.random.default_rng(seed)
    out = fm.values.copy()
    for _ in range(count):
        width = int(rng.integers(0, max_width + 1))
        start = int(rng.integers(0, t - width + 1))
        out[start : start + width, :] = fill
    return replace(fm, values=out)


def freq_mask(fm: FeatureMatrix, max_width: int, count: int, fill: float, seed: int) -> FeatureMatrix:
    """Mirror of time_mask along the frequency axis."""
    f = fm.n_dims
    if max_width > f:
        raise DataError(f"frequency mask width {max_width} exceeds F={f}")
    rng = np.random.default_rng(seed)
    out = fm.values.copy()
    for _ in range(count):
        width = int(rng.integers(0, max_width + 1))
        start = int(rng.integers(0, f - width + 1))
        out[:, start : start + width] = fill
    return replace(fm, values=out)


def warp_source_positions(n_frames: int, pivot_from: int, pivot_to: int) -> np.ndarray:
    """Piecewise-linear source index for each output frame, endpoints fixed."""
    t = np.arange(n_frames, dtype=np.float64)
    src = np.empty(n_frames)
    head = t <= pivot_to
    src[head] = t[head] * (pivot_from / pivot_to)
    tail = ~head
    src[tail] = pivot_from + (t[tail] - pivot_to) * (
        (n_frames - 1 - pivot_from) / (n_frames - 1 - pivot_to)
    )
    return src


def time_warp(fm: FeatureMatrix, max_shift: int, seed: int) -> FeatureMatrix:
    """Displace one random control frame and piecewise-linearly remap the rest.

    Draws t0 ~ U[max_shift, T - max_shift] then d ~ U[-max_shift, max_shift]
    with the seeded generator; rows are linearly interpolated at the
    remapped positions. Output shape equals input shape.
    """
    t = fm.n_frames
    if max_shift == 0:
        return replace(fm, values=fm.values.copy())
    if t <= 2 * max_shift:
        raise DataError(f"time warp needs T > 2*max_shift, got T={t}, max_shift={max_shift}")
    rng = np.random.default_rng(seed)
    t0 = int(rng.integers(max_shift, t - max_shift + 1))
    d = int(rng.integers(-max_shift, max_shift + 1))
    pivot = min(max(t0 + d, 1), t - 2)  # keep both segments non-degenerate
    src = warp_source_positions(t, t0, pivot)
    lo = np.floor(src).astype(int)
    hi = np.minimum(lo + 1, t - 1)
    frac = (src - lo)[:, None]
    out = (1.0 - frac) * fm.values[lo] + frac * fm.values[hi]
    return replace(fm, values=out)


@dataclass(frozen=True)
class SpecAugPolicy:
    """Mask/warp sizing; defaults proportional to a 23-band, percent-scale layout."""

    time_masks: int = 1
    time_max_frac: float = 0.10
    freq_masks: int = 1
    freq_max_bins: int = 5
    warp_max_shift: int = 5
    fill: float | None = None  # per-matrix mean when None


def spec_augment(
    fm: FeatureMatrix,
    mode: str,
    seed: int,
    policy: SpecAugPolicy = SpecAugPolicy(),
) -> FeatureMatrix:
    """Apply masking (modes T, F) or masking plus warp (mode TF).

    Mode TF composes time_warp(freq_mask(time_mask(x))). The fill value
    defaults to the per-matrix mean, computed before any masking.
    """
    if mode not in ("T", "F", "TF"):
        raise DataError(f"specaug mode must be T, F or TF, got {mode!r}")
    fill = float(np.mean(fm.values)) if policy.fill is None else policy.fill
    out = fm
    if mode in ("T", "TF"):
        max_w = min(fm.n_frames, int(round(policy.time_max_frac * fm.n_frames)))
        out = time_mask(out, max_w, policy.time_masks, fill, stable_seed(seed, "tmask"))
    if mode in ("F", "TF"):
        max_w = min(policy.freq_max_bins, fm.n_dims)
        out = freq_mask(out, max_w, policy.freq_masks, fill, stable_seed(seed, "fmask"))
    if mode == "TF":
        shift = min(policy.warp_max_shift, (fm.n_frames - 1) // 2)
        out = time_warp(out, shift, stable_seed(seed, "warp"))
    return out


@dataclass(frozen=True)
class FeatureStats:
    """Per-dimension mean/std, fitted on training data only."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, matrices) -> "FeatureStats":
        """Two-pass moments over matrices in the given (fixed) order."""
        arrays = [np.asarray(m.values if isinstance(m, FeatureMatrix) else m) for m in matrices]
        if not arrays:
            raise DataError("cannot fit feature stats on an empty list")
        count = sum(a.shape[0] for a in arrays)
        total = np.zeros(arrays[0].shape[1])
        for a in arrays:
            total += a.sum(axis=0)
        mean = total / count
        sq = np.zeros_like(total)
        for a in arrays:
            sq += ((a - mean) ** 2).sum(axis=0)
        return cls(mean=mean, std=np.sqrt(sq / count))

    def to_json(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "FeatureStats":
        return cls(mean=np.asarray(d["mean"], dtype=np.float64),
                   std=np.asarray(d["std"], dtype=np.float64))


def normalize(fm: FeatureMatrix, stats: FeatureStats) -> FeatureMatrix:
    """Per-dimension (x - mean) / max(std, 1e-8)."""
    if stats.mean.shape[0] != fm.n_dims:
        raise DataError(
            f"stats have {stats.mean.shape[0]} dims, features have {fm.n_dims}"
        )
    values = (fm.values - stats.mean) / np.maximum(stats.std, 1e-8)
    return replace(fm, values=values)


def save_features(dir_path, fm: FeatureMatrix, cfg: MelConfig) -> None:
    """Cache one utterance: row-major float64 blob plus a JSON sidecar header."""
    stem = dir_path / fm.source_id
    header = {
        "source_id": fm.source_id,
        "T": fm.n_frames,
        "F": fm.n_dims,
        "frame_shift_ms": fm.frame_shift_ms,
        "cfg_hash": cfg.hash(),
    }
    with open(f"{stem}.json", "w", encoding="utf-8") as f:
        json.dump(header, f, sort_keys=True)
    fm.values.astype("<f8").tofile(f"{stem}.bin")


def load_features(dir_path, source_id: str, cfg: MelConfig | None = None) -> FeatureMatrix:
    stem = dir_path / source_id
    with open(f"{stem}.json", "r", encoding="utf-8") as f:
        header = json.load(f)
    if cfg is not None and header["cfg_hash"] != cfg.hash():
        raise DataError(f"feature cache for {source_id!r} was built with a different config")
    values = np.fromfile(f"{stem}.bin", dtype="<f8").reshape(header["T"], header["F"])
    return FeatureMatrix(values, header["frame_shift_ms"], source_id)


def cached_header(dir_path, source_id: str) -> dict | None:
    try:
        with open(dir_path / f"{source_id}.json", "r", encoding="utf-8") as f:
            return json.load(f)
    except (FileNotFoundError, json.JSONDecodeError):
        return None
