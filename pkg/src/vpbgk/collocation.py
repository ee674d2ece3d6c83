"""Gauss-Legendre collocation on z ~ U([0, 1]) and the associated estimators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CollocationSet:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.nodes.size


def gauss_legendre_nodes(n_z: int) -> CollocationSet:
    """Nodes in (0, 1) and weights summing to 1 for the uniform density."""
    if n_z < 1:
        raise ValueError(f"need at least one collocation node, got {n_z}")
    t, w = np.polynomial.legendre.leggauss(n_z)
    w = 0.5 * w
    return CollocationSet(nodes=0.5 * (t + 1.0), weights=w / w.sum())


def fixed_node(z: float) -> CollocationSet:
    """Degenerate one-node set for deterministic runs at a prescribed z."""
    return CollocationSet(nodes=np.array([float(z)]), weights=np.array([1.0]))


def _stack(values, cset: CollocationSet) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape[0] != cset.size:
        raise ValueError(f"got {arr.shape[0]} node values for {cset.size} collocation nodes")
    return arr


def estimate_expectation(values, cset: CollocationSet) -> np.ndarray:
    return np.tensordot(cset.weights, _stack(values, cset), axes=1)


def estimate_variance(values, cset: CollocationSet) -> np.ndarray:
    arr = _stack(values, cset)
    mean = np.tensordot(cset.weights, arr, axes=1)
    return np.tensordot(cset.weights, (arr - mean) ** 2, axes=1)


def collocation_error(mean_rho: np.ndarray, ref_mean_rho: np.ndarray) -> float:
    """Max-norm distance between two expected-density grids on the same mesh."""
    a, b = np.asarray(mean_rho), np.asarray(ref_mean_rho)
    if a.shape != b.shape:
        raise ValueError(f"mesh mismatch: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(b - a)))
