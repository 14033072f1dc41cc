"""Deterministic random-stream plumbing.

Every stochastic quantity in the simulator (channel draw, additive noise,
information bits, interleaver permutation) comes from its own
counter-based substream, keyed by a master seed plus a small integer
path. Streams are therefore independent of evaluation order: running SNR
points in a different order, or splitting frames across workers,
reproduces bit-identical results.
"""

import numpy as np

__all__ = ["PURPOSES", "substream", "frame_stream", "derived_seed"]

# Integer tags for the per-frame draw purposes. The keys deliberately do
# not include the SNR point, so a sweep reuses the same channel and noise
# realisations at every SNR (common random numbers).
PURPOSES = {
    "channel": 0,
    "noise": 1,
    "info_bits": 2,
    "interleaver": 3,
}


def substream(seed, *path):
    """Generator for the substream identified by (seed, *path).

    Uses the Philox counter-based bit generator, so distinct paths give
    statistically independent streams regardless of how much each one is
    consumed.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_key(seed, path))))


def frame_stream(seed, frame_index, purpose):
    """Substream for one named draw purpose within one frame."""
    return substream(seed, frame_index, PURPOSES[purpose])


def derived_seed(seed, *path):
    """A plain integer seed derived from (seed, *path).

    Used where an API takes a seed rather than a generator (the
    interleaver), keeping the whole experiment keyed by one master seed.
    """
    return int(np.random.SeedSequence(_key(seed, path)).generate_state(2, np.uint64)[0])


def _key(seed, path):
    key = [int(seed)]
    for p in path:
        p = int(p)
        if p < 0:
            raise ValueError("stream path elements must be non-negative")
        key.append(p)
    return tuple(key)
