"""WAV I/O and elementary waveform algebra.

All audio is handled as mono float64 in [-1, 1] with an explicit sample
rate; multichannel files are averaged to mono at ingest.
"""

from __future__ import annotations

import logging
import wave
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.signal import resample_poly

from .errors import DataError

log = logging.getLogger(__name__)

PCM_SCALE = 32768  # 16-bit full scale


class UnsupportedEncodingError(DataError):
    """WAV container holds something other than 16-bit integer PCM."""


class TruncatedWavError(DataError):
    """WAV container shorter or more damaged than its header promises."""


@dataclass(frozen=True)
class Waveform:
    """Mono audio signal: float64 samples in [-1, 1] plus its sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if self.sample_rate <= 0:
            raise DataError(f"sample_rate must be positive, got {self.sample_rate}")
        if samples.ndim != 1:
            raise DataError(f"waveform must be 1-D, got shape {samples.shape}")
        if samples.size and not np.isfinite(samples).all():
            raise DataError("waveform contains NaN or Inf samples")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate


def load_wav(path) -> Waveform:
    """Read a RIFF/WAVE file holding 16-bit PCM, averaging channels to mono.

    Raises FileNotFoundError for a missing file, UnsupportedEncodingError
    for non-PCM or non-16-bit encodings, TruncatedWavError for containers
    with less payload than declared.
    """
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            sampwidth = wf.getsampwidth()
            rate = wf.getframerate()
            n_frames = wf.getnframes()
            if wf.getcomptype() != "NONE":
                raise UnsupportedEncodingError(
                    f"{path}: compressed WAV ({wf.getcomptype()}) not supported"
                )
            if sampwidth != 2:
                raise UnsupportedEncodingError(
                    f"{path}: only 16-bit PCM supported, got {8 * sampwidth}-bit"
                )
            payload = wf.readframes(n_frames)
    except FileNotFoundError:
        raise
    except EOFError as exc:
        raise TruncatedWavError(f"{path}: truncated WAV header") from exc
    except wave.Error as exc:
        msg = str(exc)
        if "unknown format" in msg or "format" in msg.lower():
            raise UnsupportedEncodingError(f"{path}: {msg}") from exc
        raise TruncatedWavError(f"{path}: {msg}") from exc

    expected = n_frames * n_channels * 2
    if len(payload) < expected:
        raise TruncatedWavError(
            f"{path}: expected {expected} payload bytes, found {len(payload)}"
        )
    raw = np.frombuffer(payload, dtype="<i2")
    if n_channels > 1:
        raw = raw.reshape(-1, n_channels).mean(axis=1)
    samples = np.asarray(raw, dtype=np.float64) / PCM_SCALE
    return Waveform(samples, rate)


def save_wav(path, w: Waveform) -> int:
    """Write mono 16-bit PCM. Returns the number of clipped samples.

    Amplitudes beyond [-1, 1] are clipped to full scale; a warning with the
    clip count is logged.
    """
    if len(w) == 0:
        raise DataError("refusing to write an empty waveform")
    n_clip = int(np.count_nonzero((w.samples > 1.0) | (w.samples < -1.0)))
    if n_clip:
        log.warning("save_wav(%s): clipped %d samples beyond [-1, 1]", path, n_clip)
    q = np.clip(np.rint(w.samples * PCM_SCALE), -PCM_SCALE, PCM_SCALE - 1)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(w.sample_rate)
        wf.writeframes(q.astype("<i2").tobytes())
    return n_clip


def mean_power(w: Waveform) -> float:
    """Mean squared amplitude of the signal."""
    if len(w) == 0:
        raise DataError("mean_power of an empty waveform")
    return float(np.mean(w.samples**2))


def concat(a: Waveform, b: Waveform, gap_ms: float = 0.0) -> Waveform:
    """Join two waveforms with gap_ms of silence between them."""
    if a.sample_rate != b.sample_rate:
        raise DataError(
            f"sample rate mismatch: {a.sample_rate} vs {b.sample_rate}"
        )
    gap = int(round(gap_ms * a.sample_rate / 1000.0))
    silence = np.zeros(gap, dtype=np.float64)
    return Waveform(np.concatenate([a.samples, silence, b.samples]), a.sample_rate)


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Band-limited (windowed-sinc polyphase) resampling to target_rate.

    Rejects ratios beyond 4x up or down as a quality guard. Output length
    is round(len * target / source); the identity ratio returns the input
    samples bit-identically.
    """
    if target_rate <= 0:
        raise DataError(f"target_rate must be positive, got {target_rate}")
    src = w.sample_rate
    if target_rate == src:
        return Waveform(w.samples.copy(), src)
    if target_rate > 4 * src or 4 * target_rate < src:
        raise DataError(
            f"resample ratio {target_rate}/{src} outside the 4x quality guard"
        )
    ratio = Fraction(target_rate, src)
    out = resample_poly(w.samples, ratio.numerator, ratio.denominator)
    n_out = int(round(Fraction(len(w)) * ratio))
    if len(out) >= n_out:
        out = out[:n_out]
    else:
        out = np.concatenate([out, np.zeros(n_out - len(out))])
    return Waveform(out, target_rate)
