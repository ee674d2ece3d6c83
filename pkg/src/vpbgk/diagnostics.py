"""Boundary-band statistics and grid moment reconstruction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collisions import moments_from_index
from .domain import BoundaryBand, Mesh, ParticleEnsemble


@dataclass(frozen=True)
class BoundaryStats:
    rho_b: float
    ux_b: float
    uy_b: float
    E_b: float
    T_b: float
    empty: bool


def boundary_stats(
    ensemble: ParticleEnsemble,
    mesh: Mesh,
    band: BoundaryBand,
    vx: np.ndarray | None = None,
    vy: np.ndarray | None = None,
    iy: np.ndarray | None = None,
) -> BoundaryStats:
    """Mass, mean velocity and thermal energy of the particles in wall rows.

    Counts are normalized by N times the number of band cells, so E_b scales
    with the fraction of the plasma sitting at the wall. ``vx``/``vy`` override
    the ensemble velocities (e.g. to evaluate post-collision values).
    """
    vx = ensemble.vx if vx is None else vx
    vy = ensemble.vy if vy is None else vy
    if iy is None:
        _, iy = mesh.cell_indices(ensemble.x, ensemble.y)
    rows = band.row_mask(mesh)
    n_b = int(rows.sum()) * mesh.m_x
    sel = rows[iy]
    count = int(np.count_nonzero(sel))
    if count == 0 or n_b == 0:
        return BoundaryStats(0.0, 0.0, 0.0, 0.0, 0.0, True)
    norm = ensemble.n * n_b
    bx, by = vx[sel], vy[sel]
    ux, uy = bx.mean(), by.mean()
    e_b = float(np.sum((bx - ux) ** 2 + (by - uy) ** 2)) / (2.0 * norm)
    rho_b = count / norm
    return BoundaryStats(rho_b, float(ux), float(uy), e_b, rho_b * e_b, False)


@dataclass
class MomentGrids:
    rho: np.ndarray
    ux: np.ndarray
    uy: np.ndarray
    T: np.ndarray


def reconstruct_moments_grid(ensemble: ParticleEnsemble, mesh: Mesh) -> MomentGrids:
    """Per-cell density (mass / area), mean velocity and temperature.

    Empty cells carry NaN velocity and temperature.
    """
    idx = mesh.flat_index(ensemble.x, ensemble.y)
    m = moments_from_index(idx, ensemble.omega, ensemble.vx, ensemble.vy, mesh.n_cells)
    shape = mesh.shape
    return MomentGrids(
        rho=(m.rho / mesh.cell_area).reshape(shape),
        ux=m.ux.reshape(shape),
        uy=m.uy.reshape(shape),
        T=m.T.reshape(shape),
    )
