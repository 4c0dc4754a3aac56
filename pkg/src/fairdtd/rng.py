"""Deterministic random-stream derivation.

All randomness in the package flows through numpy's PCG64 generator, seeded
from a ``SeedSequence`` built out of ``(master_seed, crc32(label))``.  The
label names the consumer ("teacher-feature", "student", "sbm", ...), so
adding or removing one phase never shifts the stream of another.  The
generator name is recorded in every manifest so datasets and runs can be
reproduced independently.
"""

from __future__ import annotations

import zlib

import numpy as np

PRNG_NAME = "numpy-pcg64"


def stream_key(label: str) -> int:
    """Stable 32-bit key for a stream label (CRC-32 of the UTF-8 bytes)."""
    return zlib.crc32(label.encode("utf-8"))


def rng_for(seed: int, label: str) -> np.random.Generator:
    """Generator for one named stream of a master seed."""
    seq = np.random.SeedSequence([int(seed), stream_key(label)])
    return np.random.Generator(np.random.PCG64(seq))
