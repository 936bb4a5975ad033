"""Deterministic seed derivation shared across the pipeline.

All randomness in the package flows from 64-bit integer seeds through
``numpy.random.SeedSequence``.  Derived seeds are a pure function of the root
seed and an integer path, never of execution order, so any stage of the
pipeline can be re-run (or run in parallel) and produce identical results.

The boosting core uses SplitMix64 streams (one per boosting stage, seeded from
spawned SeedSequence children); see :mod:`uxcast.gbrt`.
"""

from __future__ import annotations

import numpy as np

__all__ = ["child_seed", "make_rng", "stage_seeds", "SplitMix64"]


def child_seed(seed: int, *path: int) -> int:
    """Derive a 64-bit child seed from ``seed`` and an integer path."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed: int, *path: int) -> np.random.Generator:
    """A PCG64 generator keyed by ``seed`` and an optional derivation path."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.PCG64(ss))


def stage_seeds(seed: int, n_stages: int) -> np.ndarray:
    """One uint64 stream seed per boosting stage.

    Children are spawned by index, so the first ``k`` seeds do not depend on
    ``n_stages``: a model truncated at ``k`` stages sees exactly the streams a
    ``k``-stage fit would.
    """
    root = np.random.SeedSequence(seed)
    return np.array(
        [child.generate_state(1, np.uint64)[0] for child in root.spawn(n_stages)],
        dtype=np.uint64,
    )


class SplitMix64:
    """Minimal SplitMix64 stream exposing uniform doubles in [0, 1).

    This is the in-tree random stream consumed while growing boosted trees
    (row subsampling and per-node feature subsets).  The same update runs
    inside the compiled kernels; this Python mirror exists so ``fit_tree``
    can be driven directly and so tests can replay draws.
    """

    __slots__ = ("state",)

    _GOLDEN = 0x9E3779B97F4A7C15
    _MIX1 = 0xBF58476D1CE4E5B9
    _MIX2 = 0x94D049BB133111EB
    _MASK = 0xFFFFFFFFFFFFFFFF

    def __init__(self, seed: int):
        self.state = int(seed) & self._MASK

    def next_uint64(self) -> int:
        self.state = (self.state + self._GOLDEN) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * self._MIX1) & self._MASK
        z = ((z ^ (z >> 27)) * self._MIX2) & self._MASK
        return z ^ (z >> 31)

    def keys(self, n: int) -> np.ndarray:
        """``n`` uniform doubles, the draw primitive used by the kernels."""
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            out[i] = (self.next_uint64() >> 11) * (1.0 / 9007199254740992.0)
        return out
