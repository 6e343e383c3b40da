"""Named random streams.

Every sampler takes an explicit ``numpy.random.Generator``. Streams are derived
from a root seed with ``SeedSequence`` spawn keys, so a stream is identified by
its key path (e.g. ``(seed, replica, GRAPH)``) and never by call order. The bit
generator is PCG64.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

# stream tags
GRAPH = 1
ROOTS = 2
STEP5 = 3
DUMMY = 4
CONTINUE = 5
LIMIT = 6
SEQUENTIAL = 7
BOOTSTRAP = 8


def _key_part(k) -> int:
    if isinstance(k, (int, np.integer)):
        if k < 0:
            raise ValueError("stream keys must be nonnegative")
        return int(k)
    return zlib.crc32(str(k).encode())


@dataclass(frozen=True)
class Streams:
    """A node in the stream tree: ``Streams(seed).child(3, "x").generator()``."""

    seed: int
    key: tuple = ()

    def child(self, *key) -> "Streams":
        return Streams(self.seed, self.key + tuple(_key_part(k) for k in key))

    def generator(self, *key) -> np.random.Generator:
        full = self.key + tuple(_key_part(k) for k in key)
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=full)
        return np.random.Generator(np.random.PCG64(ss))


def as_streams(obj) -> Streams:
    if isinstance(obj, Streams):
        return obj
    if obj is None:
        return Streams(0)
    if isinstance(obj, (int, np.integer)):
        return Streams(int(obj))
    raise TypeError(f"cannot derive named streams from {type(obj).__name__}")


def make_rng(seed, *key) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        if key:
            raise ValueError("cannot key an existing Generator")
        return seed
    return as_streams(seed).generator(*key)
