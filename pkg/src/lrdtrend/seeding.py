"""Counter-based seed derivation.

Every random draw in the package comes from a generator built from
``SeedSequence(master, spawn_key=(stream, *counters))``. Seeds therefore depend
only on the master seed and the position of the draw (cell, replicate,
subject), never on execution order, which keeps parallel and serial runs
bit-identical.
"""

from __future__ import annotations

import numpy as np

# stream identifiers, kept stable across releases
DESIGN = 1
SCORES = 2
NOISE = 3
PATH = 4


def derive_seed(master: int, stream: int, *counters: int) -> np.random.SeedSequence:
    """Return the seed sequence for ``stream`` at position ``counters``."""
    key = tuple(int(c) for c in (stream, *counters))
    if any(c < 0 for c in key):
        raise ValueError("seed counters must be non-negative")
    return np.random.SeedSequence(entropy=int(master), spawn_key=key)


def make_rng(seed) -> np.random.Generator:
    """Coerce an int, SeedSequence or Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
