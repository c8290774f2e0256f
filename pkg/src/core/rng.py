"""
Random Streams

All randomness in the package comes from ``numpy.random.Generator`` objects built
here. A stream is addressed by a master seed plus any number of integer or string
keys; the same address always yields the same stream, independently of the order
in which streams are requested, so parallel tasks stay reproducible.

Usage:
    from src.core.rng import stream

    rng = stream(42, "sfcWind__max__Global__UK__SSP585__r1i1p1f2")
    replicate_rng = stream(42, 7)
"""

import hashlib
from typing import List, Tuple, Union

import numpy as np

StreamKey = Union[int, str]


def _key_words(key: StreamKey) -> List[int]:
    """Map a stream key onto unsigned 32-bit words for ``SeedSequence.spawn_key``."""
    if isinstance(key, (bool, np.bool_)):
        raise TypeError("stream keys must be int or str")
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"stream keys must be non-negative, got {key}")
        return [int(key)]
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


def spawn_key(*keys: StreamKey) -> Tuple[int, ...]:
    """Flatten stream keys into a spawn key tuple."""
    words: List[int] = []
    for key in keys:
        words.extend(_key_words(key))
    return tuple(words)


def stream(seed: int, *keys: StreamKey) -> np.random.Generator:
    """
    Independent PCG64 generator for ``(seed, *keys)``.

    Args:
        seed: Master seed (non-negative 64-bit integer)
        *keys: Sub-stream address, e.g. a replicate index or a dataset slug

    Returns:
        numpy Generator
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=spawn_key(*keys))
    return np.random.Generator(np.random.PCG64(sequence))
