"""Counter-based, splittable random streams.

A stream is a Philox generator whose 128-bit key is (seed, stream id). Any
replica can be regenerated in isolation from the master seed and its id, so
results do not depend on how work is scheduled across threads.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

_MASK64 = (1 << 64) - 1


def stream_id(*parts) -> int:
    """Fold an arbitrary tuple of labels/ints into a 64-bit stream id."""
    if len(parts) == 1 and isinstance(parts[0], int) and 0 <= parts[0] <= _MASK64:
        return parts[0]
    blob = json.dumps(parts, separators=(",", ":"), default=str).encode()
    return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "little")


def stream(seed: int, *ids) -> np.random.Generator:
    """Generator keyed by ``(seed, ids)``; ``stream(seed)`` is stream 0."""
    sid = stream_id(*ids) if ids else 0
    key = (int(seed) & _MASK64) | (sid << 64)
    return np.random.Generator(np.random.Philox(key=key))


def config_hash(obj) -> str:
    """Short stable hash of a JSON-serialisable object."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
