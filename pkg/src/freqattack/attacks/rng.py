"""Counter-keyed Gaussian noise streams.

Noise for (iteration, sample) is drawn from an independent substream of
the run seed, so results are bit-identical no matter how probe
evaluations are scheduled.
"""

from __future__ import annotations

import numpy as np


class CounterRng:
    def __init__(self, seed):
        self.seed = int(seed)

    def normal(self, key, shape):
        """Standard normal draw from the substream keyed by the integer
        tuple `key`."""
        seq = np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))
        return np.random.default_rng(seq).standard_normal(shape)
