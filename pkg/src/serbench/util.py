"""Deterministic hashing helpers used for seeding and cache keys."""

from __future__ import annotations

import hashlib
import json


def stable_seed(*parts) -> int:
    """Derive a 63-bit seed from arbitrary parts, stable across processes.

    Python's builtin hash() is salted per process, so RNG streams keyed on
    it would not reproduce; this goes through sha256 instead.
    """
    payload = "\x1f".join(str(p) for p in parts).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little") & 0x7FFF_FFFF_FFFF_FFFF


def config_hash(obj) -> str:
    """Short content hash of a JSON-serializable config."""
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()[:16]
