"""Deterministic random streams.

Every draw is addressed by (purpose, step, block) and derived from the master
seed through ``numpy.random.SeedSequence`` spawn keys, so the numbers a
particle receives never depend on how the particle range is partitioned or on
which collocation node asks for them. Nodes that request the same
(purpose, step) get the same numbers: that is the common-random-numbers
coupling the per-particle statistical operator relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PURPOSES = {
    "init-x": 0,
    "init-y": 1,
    "init-v": 2,
    "collision-eta": 3,
    "collision-xi": 4,
}

BLOCK = 1 << 16


@dataclass(frozen=True)
class RngPolicy:
    master_seed: int = 0
    block: int = BLOCK

    def _generator(self, purpose: str, step: int, block: int) -> np.random.Generator:
        key = (PURPOSES[purpose], int(step), int(block))
        ss = np.random.SeedSequence(entropy=int(self.master_seed) & (2**64 - 1), spawn_key=key)
        return np.random.Generator(np.random.PCG64(ss))

    def uniforms(self, purpose: str, step: int, n: int, dim: int = 1) -> np.ndarray:
        """Uniform draws in [0, 1), shape (n,) or (n, dim)."""
        out = np.empty((n, dim))
        for b, start in enumerate(range(0, n, self.block)):
            stop = min(start + self.block, n)
            out[start:stop] = self._generator(purpose, step, b).random((stop - start, dim))
        return out[:, 0] if dim == 1 else out

    def normals(self, purpose: str, step: int, n: int) -> np.ndarray:
        """Standard normal pairs, shape (n, 2), via Box-Muller."""
        u = self.uniforms(purpose, step, n, dim=2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        theta = 2.0 * np.pi * u[:, 1]
        return np.column_stack((r * np.cos(theta), r * np.sin(theta)))
