"""Waveform-level augmentation strategies and corpus-level policies.

Four strategies: additive Gaussian noise at a target SNR, pitch-preserving
time stretching (WSOLA), feature-stage spectrogram masking (tagged here,
applied in the feature pipeline), and neutral+emotional copy-paste used to
balance class counts. Everything is a deterministic function of its inputs
and a seed; per-record streams are derived by hashing so results do not
depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .audio import Waveform, concat, mean_power
from .errors import DataError
from .manifest import LABELS, NEUTRAL, ManifestRecord, Provenance
from .util import stable_seed

SPEED_MIXED_FACTORS = (0.9, 1.1)

# Table-style condition tags, in the order reports use them.
PAPER_GRID = (
    "NoAug",
    "Noise(10db)",
    "Noise(20db)",
    "Noise(30db)",
    "SpecAug(TF)",
    "SpecAug(T)",
    "SpecAug(F)",
    "Speed(0.9)",
    "Speed(1.1)",
    "Speed(M)",
    "CopyPaste",
)


@dataclass(frozen=True)
class AugmentSpec:
    """One augmentation condition: a strategy plus its parameters and seed."""

    kind: str  # noaug | noise | specaug | speed | copy_paste
    snr_db: float | None = None
    mode: str | None = None  # T | F | TF
    factor: float | str | None = None  # ratio, or "mixed"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("noaug", "noise", "specaug", "speed", "copy_paste"):
            raise DataError(f"unknown augmentation kind {self.kind!r}")
        if self.kind == "noise" and (self.snr_db is None or not math.isfinite(self.snr_db)):
            raise DataError("noise augmentation needs a finite snr_db")
        if self.kind == "specaug" and self.mode not in ("T", "F", "TF"):
            raise DataError(f"specaug mode must be T, F or TF, got {self.mode!r}")
        if self.kind == "speed":
            if self.factor == "mixed":
                pass
            elif not (isinstance(self.factor, (int, float)) and self.factor > 0):
                raise DataError(f"speed factor must be positive or 'mixed', got {self.factor!r}")

    def tag(self) -> str:
        if self.kind == "noaug":
            return "NoAug"
        if self.kind == "noise":
            return f"Noise({self.snr_db:g}db)"
        if self.kind == "specaug":
            return f"SpecAug({self.mode})"
        if self.kind == "speed":
            return "Speed(M)" if self.factor == "mixed" else f"Speed({self.factor:g})"
        return "CopyPaste"


def parse_tag(tag: str, seed: int = 0) -> AugmentSpec:
    """Parse a table-style condition tag such as "Noise(10db)" or "Speed(M)"."""
    t = tag.strip()
    low = t.lower()
    if low == "noaug":
        return AugmentSpec("noaug", seed=seed)
    if low == "copypaste":
        return AugmentSpec("copy_paste", seed=seed)
    if low.startswith("noise(") and low.endswith("db)"):
        return AugmentSpec("noise", snr_db=float(low[6:-3]), seed=seed)
    if low.startswith("specaug(") and low.endswith(")"):
        return AugmentSpec("specaug", mode=t[8:-1].upper(), seed=seed)
    if low.startswith("speed(") and low.endswith(")"):
        inner = low[6:-1]
        factor = "mixed" if inner in ("m", "mixed") else float(inner)
        return AugmentSpec("speed", factor=factor, seed=seed)
    raise DataError(f"unknown augmentation tag {tag!r}; expected one of {', '.join(PAPER_GRID)}")


def add_noise(w: Waveform, snr_db: float, seed: int) -> Waveform:
    """Add white Gaussian noise so the output hits the requested SNR exactly.

    The drawn noise is rescaled to the exact target power, so the measured
    ratio mean_power(w) / mean_power(noise) equals 10^(snr_db/10) up to
    float rounding for every input length.
    """
    if not math.isfinite(snr_db):
        raise DataError(f"snr_db must be finite, got {snr_db}")
    p_sig = mean_power(w)
    if p_sig <= 0.0:
        raise DataError("SNR undefined for an all-zero signal")
    target_power = p_sig / (10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(w))
    noise *= math.sqrt(target_power / float(np.mean(noise**2)))
    return Waveform(w.samples + noise, w.sample_rate)


def time_stretch(
    w: Waveform,
    factor: float,
    seed: int = 0,
    window_ms: float = 25.0,
) -> Waveform:
    """WSOLA time stretching: change duration by 1/factor, preserve pitch.

    factor > 1 speeds the signal up (shorter output). Output length is
    exactly round(len / factor). Factor 1.0 returns the samples unchanged.
    The algorithm is deterministic; seed is accepted for API uniformity.
    """
    del seed
    if not 0.5 <= factor <= 2.0:
        raise DataError(f"speed factor must be in [0.5, 2.0], got {factor}")
    win = int(round(window_ms * w.sample_rate / 1000.0))
    if len(w) < win:
        raise DataError(
            f"input of {len(w)} samples shorter than one {window_ms:g} ms analysis window"
        )
    if factor == 1.0:
        return Waveform(w.samples.copy(), w.sample_rate)

    n_out = int(round(len(w) / factor))
    hop = win // 2
    tol = max(1, win // 4)
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(win) / win)  # periodic Hann

    x = w.samples
    # slack so segment reads never run off the end
    xp = np.concatenate([x, np.zeros(win + hop + tol)])
    out = np.zeros(n_out + win)
    den = np.zeros(n_out + win)

    n_frames = max(1, (n_out - win) // hop + 2)
    prev = 0
    out[:win] += window * xp[:win]
    den[:win] += window
    for k in range(1, n_frames):
        target = xp[prev + hop : prev + hop + win]
        center = int(round(k * hop * factor))
        lo = max(0, center - tol)
        hi = min(len(x) - 1, center + tol)
        if hi <= lo:
            best = max(0, min(center, len(x) - 1))
        else:
            cands = np.lib.stride_tricks.sliding_window_view(xp[lo : hi + win], win)[: hi - lo + 1]
            score = cands @ target / np.maximum(np.sqrt(np.sum(cands**2, axis=1)), 1e-12)
            best = lo + int(np.argmax(score))
        prev = best
        pos = k * hop
        out[pos : pos + win] += window * xp[prev : prev + win]
        den[pos : pos + win] += window
    out = out[:n_out] / np.maximum(den[:n_out], 1e-12)
    return Waveform(out, w.sample_rate)


def copy_paste(
    neutral: tuple[Waveform, str],
    emotional: tuple[Waveform, str],
    order: str = "neutral_first",
    gap_ms: float = 0.0,
    neutral_label: str = NEUTRAL,
) -> tuple[Waveform, str]:
    """Concatenate a neutral and an emotional utterance, keeping the emotional label."""
    neutral_wav, n_label = neutral
    emotional_wav, e_label = emotional
    if n_label != neutral_label:
        raise DataError(f"first input must be {neutral_label!r}, got {n_label!r}")
    if e_label == neutral_label:
        raise DataError("second input must carry a non-neutral label")
    if order not in ("neutral_first", "emotional_first"):
        raise DataError(f"unknown order {order!r}")
    if order == "neutral_first":
        joined = concat(neutral_wav, emotional_wav, gap_ms)
    else:
        joined = concat(emotional_wav, neutral_wav, gap_ms)
    return joined, e_label


def balance_corpus(
    records: list[ManifestRecord],
    seed: int,
    gap_ms: float = 0.0,
    labels=LABELS,
) -> list[ManifestRecord]:
    """Append copy-paste records until every emotional class matches the largest class.

    Neutral partners and concatenation order are drawn with the seeded
    generator; emotional parents cycle through the class deterministically.
    Original records are returned untouched, in their original order.
    """
    by_label: dict[str, list[ManifestRecord]] = {lab: [] for lab in labels}
    for r in records:
        by_label[r.label].append(r)
    neutrals = by_label[NEUTRAL]
    if not neutrals:
        raise DataError("balance_corpus needs at least one neutral utterance")
    emotional_labels = [lab for lab in labels if lab != NEUTRAL]
    for lab in emotional_labels:
        if not by_label[lab]:
            raise DataError(f"balance_corpus: class {lab!r} is empty")

    target = max(len(by_label[lab]) for lab in labels)
    rng = np.random.default_rng(stable_seed(seed, "balance"))
    out = list(records)
    for lab in emotional_labels:
        parents = by_label[lab]
        for i in range(target - len(parents)):
            emo = parents[i % len(parents)]
            partner = neutrals[int(rng.integers(len(neutrals)))]
            order = "neutral_first" if rng.integers(2) == 0 else "emotional_first"
            out.append(
                ManifestRecord(
                    id=f"{emo.id}~cp{i}",
                    path="",
                    label=emo.label,
                    speaker=emo.speaker,
                    group=emo.group,
                    gender=emo.gender,
                    rater_agreement=emo.rater_agreement,
                    provenance=Provenance(
                        kind="copy_paste",
                        source_ids=(partner.id, emo.id),
                        params={"order": order, "gap_ms": gap_ms},
                        seed=int(seed),
                    ),
                )
            )
    return out


def expand_corpus(records: list[ManifestRecord], spec: AugmentSpec) -> list[ManifestRecord]:
    """Extend a manifest with one augmented record per original per parameter value.

    Noise and SpecAug add one derived record per original; Speed adds one
    per factor (two for "mixed"). NoAug returns the input unchanged.
    Copy-paste belongs to balance_corpus and is rejected here.
    """
    if spec.kind == "noaug":
        return list(records)
    if spec.kind == "copy_paste":
        raise DataError("copy_paste expands via balance_corpus, not expand_corpus")

    out = list(records)
    if spec.kind == "noise":
        for r in records:
            out.append(_derived(r, f"{r.id}~noise{spec.snr_db:g}db", "noise",
                                {"snr_db": spec.snr_db}, spec.seed))
    elif spec.kind == "speed":
        factors = SPEED_MIXED_FACTORS if spec.factor == "mixed" else (float(spec.factor),)
        for factor in factors:
            for r in records:
                out.append(_derived(r, f"{r.id}~speed{factor:g}", "speed",
                                    {"factor": factor}, spec.seed))
    elif spec.kind == "specaug":
        for r in records:
            out.append(_derived(r, f"{r.id}~sa{spec.mode}", "specaug",
                                {"mode": spec.mode}, spec.seed))
    return out


def _derived(r: ManifestRecord, new_id: str, kind: str, params: dict, seed: int) -> ManifestRecord:
    return replace(
        r,
        id=new_id,
        path="",
        provenance=Provenance(
            kind=kind,
            source_ids=(r.id,),
            params=params,
            seed=stable_seed(seed, r.id, kind),
        ),
    )
