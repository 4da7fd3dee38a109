"""Reproducible random streams for parallel sampling.

Every draw in a run owns an independent stream derived from
``(master seed, draw index)`` through ``numpy.random.SeedSequence``
spawn keys, backed by the counter-based Philox bit generator.  The
stream a draw sees is therefore independent of worker count and
scheduling order, which is what makes run outputs byte-reproducible.
"""

from __future__ import annotations

import numpy as np

# Pinned in every run manifest.  Philox is counter-based: jumping to the
# stream of draw k never requires generating draws 0..k-1.
RNG_ALGORITHM = "philox4x64 (numpy.random.Philox, SeedSequence spawn keys)"


def rng_stream(seed: int, index: int = 0) -> np.random.Generator:
    """Return the generator for draw `index` of a run with master `seed`."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if index < 0:
        raise ValueError(f"draw index must be nonnegative, got {index}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))
