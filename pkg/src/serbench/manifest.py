"""Utterance manifests: the JSONL record format driving folds and augmentation."""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field

from .errors import DataError

log = logging.getLogger(__name__)

LABELS = ("neutral", "angry", "sad", "happy")
NEUTRAL = "neutral"


@dataclass(frozen=True)
class Provenance:
    """How a derived record was produced from its source records."""

    kind: str  # noise | speed | specaug | copy_paste
    source_ids: tuple[str, ...]
    params: dict = field(default_factory=dict)
    seed: int = 0


@dataclass(frozen=True)
class ManifestRecord:
    id: str
    path: str
    label: str
    speaker: str
    group: str
    gender: str | None = None
    rater_agreement: float | None = None
    provenance: Provenance | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        if self.provenance is None:
            d.pop("provenance")
        else:
            d["provenance"]["source_ids"] = list(self.provenance.source_ids)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ManifestRecord":
        d = dict(d)
        prov = d.pop("provenance", None)
        if prov is not None:
            prov = Provenance(
                kind=prov["kind"],
                source_ids=tuple(prov["source_ids"]),
                params=prov.get("params", {}),
                seed=prov.get("seed", 0),
            )
        return cls(provenance=prov, **d)


def validate_manifest(records, labels=LABELS) -> None:
    seen = set()
    for r in records:
        if r.id in seen:
            raise DataError(f"duplicate manifest id {r.id!r}")
        seen.add(r.id)
        if r.label not in labels:
            raise DataError(f"record {r.id!r}: unknown label {r.label!r}")


def load_manifest(path, labels=LABELS) -> list[ManifestRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(ManifestRecord.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad manifest record: {exc}") from exc
    validate_manifest(records, labels)
    return records


def save_manifest(path, records) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r.to_json(), sort_keys=True) + "\n")


def class_counts(records, labels=LABELS) -> dict[str, int]:
    counts = Counter(r.label for r in records)
    return {lab: counts.get(lab, 0) for lab in labels}


def filter_by_agreement(records, threshold: float) -> list[ManifestRecord]:
    """Keep records whose rater agreement is at least threshold.

    Records without an agreement value pass unchanged (logged).
    """
    if not 0.0 <= threshold <= 1.0:
        raise DataError(f"agreement threshold must be in [0, 1], got {threshold}")
    kept = []
    n_missing = 0
    for r in records:
        if r.rater_agreement is None:
            n_missing += 1
            kept.append(r)
        elif r.rater_agreement >= threshold:
            kept.append(r)
    if n_missing:
        log.info("filter_by_agreement: %d records without ratings passed through", n_missing)
    return kept
