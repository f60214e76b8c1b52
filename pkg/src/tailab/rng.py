"""Deterministic substream management.

All randomness in the package flows from one 64-bit seed through named
substreams keyed by (stream tag, chunk index).  Simulations are chunked
over paths/agents with a fixed chunk size, and each chunk draws its
uniforms from its own generator.  Results are therefore independent of
how chunks are scheduled, and identical for both compute backends, which
consume pre-drawn uniforms and never touch the generator themselves.

Changing CHUNK or the stream tags changes simulated draws, so both are
frozen constants.
"""

from __future__ import annotations

import numpy as np

# Fixed chunk sizes (number of paths/agents per uniform block).
CHUNK = 32_768
# Wealth panels hold a (T, chunk) uniform block with T up to ~500; use a
# smaller chunk to keep the block around 64 MB.
CHUNK_WEALTH = 16_384

# Stream tags (one per stochastic subsystem).
STREAM_CONTRACTION = 1
STREAM_WEALTH = 2
STREAM_BIRTH_DEATH = 3


def substream(seed: int, stream: int, index: int) -> np.random.Generator:
    """Generator for chunk `index` of the given stream under `seed`."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(index)))
    return np.random.default_rng(ss)


def chunk_ranges(n: int, chunk: int = CHUNK):
    """Yield (index, start, stop) triples covering range(n)."""
    if n <= 0:
        raise ValueError("n must be positive")
    index = 0
    start = 0
    while start < n:
        stop = min(start + chunk, n)
        yield index, start, stop
        index += 1
        start = stop
