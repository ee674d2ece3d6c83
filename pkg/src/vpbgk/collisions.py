"""BGK relaxation as a Monte Carlo jump process on particle velocities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import CollisionParams, Mesh, ParticleEnsemble
from .rng import RngPolicy


@dataclass
class CellMoments:
    """Per-cell mass, mean velocity and temperature (flat cell index).

    ``defined`` is False for empty cells; their U and T are NaN.
    """

    rho: np.ndarray
    ux: np.ndarray
    uy: np.ndarray
    T: np.ndarray
    defined: np.ndarray


def moments_from_index(idx: np.ndarray, omega: float, vx: np.ndarray, vy: np.ndarray, n_cells: int) -> CellMoments:
    """Weighted cell sums with a second pass for the temperature."""
    w = np.full(idx.shape, omega)
    rho = np.bincount(idx, weights=w, minlength=n_cells)
    defined = rho > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        ux = np.bincount(idx, weights=w * vx, minlength=n_cells) / rho
        uy = np.bincount(idx, weights=w * vy, minlength=n_cells) / rho
        dev = (vx - ux[idx]) ** 2 + (vy - uy[idx]) ** 2
        T = np.bincount(idx, weights=w * dev, minlength=n_cells) / (2.0 * rho)
    ux[~defined] = np.nan
    uy[~defined] = np.nan
    T[~defined] = np.nan
    return CellMoments(rho, ux, uy, T, defined)


def compute_cell_moments(ensemble: ParticleEnsemble, mesh: Mesh) -> CellMoments:
    idx = mesh.flat_index(ensemble.x, ensemble.y)
    return moments_from_index(idx, ensemble.omega, ensemble.vx, ensemble.vy, mesh.n_cells)


def collision_draws(rng: RngPolicy, step: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(eta, xi) for one step; identical for every node asking with the same step."""
    return rng.uniforms("collision-eta", step, n), rng.normals("collision-xi", step, n)


def _conserve(idx, vx, vy, resampled, omega, mom_before, n_cells):
    """Shift and rescale the resampled velocities of each cell so that the
    cell momentum and energy match their pre-collision values exactly."""
    r = resampled
    w = np.full(idx.shape, omega)
    # Split the cell sums into kept and resampled parts.
    m_r = np.bincount(idx[r], weights=w[r], minlength=n_cells)
    ok = m_r > 0
    p_tot = np.stack((mom_before.ux, mom_before.uy)) * mom_before.rho
    p_kept = np.stack(
        (
            np.bincount(idx[~r], weights=w[~r] * vx[~r], minlength=n_cells),
            np.bincount(idx[~r], weights=w[~r] * vy[~r], minlength=n_cells),
        )
    )
    e_tot = mom_before.rho * (2.0 * mom_before.T + mom_before.ux**2 + mom_before.uy**2)
    e_kept = np.bincount(idx[~r], weights=w[~r] * (vx[~r] ** 2 + vy[~r] ** 2), minlength=n_cells)
    with np.errstate(invalid="ignore", divide="ignore"):
        target_mean = (p_tot - p_kept) / m_r
        cur_mean = np.stack(
            (
                np.bincount(idx[r], weights=w[r] * vx[r], minlength=n_cells),
                np.bincount(idx[r], weights=w[r] * vy[r], minlength=n_cells),
            )
        ) / m_r
        cur_var = np.bincount(
            idx[r],
            weights=w[r] * ((vx[r] - cur_mean[0][idx[r]]) ** 2 + (vy[r] - cur_mean[1][idx[r]]) ** 2),
            minlength=n_cells,
        )
        target_var = (e_tot - e_kept) - m_r * (target_mean[0] ** 2 + target_mean[1] ** 2)
        scale = np.sqrt(np.clip(target_var, 0.0, None) / cur_var)
    scale = np.where(ok & np.isfinite(scale), scale, 1.0)
    ci = idx[r]
    good = ok[ci] & np.isfinite(target_mean[0][ci])
    vx[r] = np.where(good, target_mean[0][ci] + scale[ci] * (vx[r] - cur_mean[0][ci]), vx[r])
    vy[r] = np.where(good, target_mean[1][ci] + scale[ci] * (vy[r] - cur_mean[1][ci]), vy[r])


def bgk_collide(
    ensemble: ParticleEnsemble,
    moments: CellMoments,
    params: CollisionParams,
    h: float,
    draws: tuple[np.ndarray, np.ndarray],
    idx: np.ndarray,
) -> np.ndarray:
    """Replace velocities in place with v*; returns the mask of resampled particles.

    Each particle keeps its velocity with probability exp(-nu h), otherwise it
    is redrawn from the Maxwellian of its cell (pre-collision moments).
    """
    eta, xi = draws
    keep_prob = np.exp(-params.nu * h)
    if keep_prob == 1.0:
        return np.zeros(ensemble.n, dtype=bool)
    resample = ~(eta < keep_prob)
    cells = idx[resample]
    if not np.all(moments.defined[cells]):
        raise RuntimeError("occupied cell without defined moments")
    T = moments.T[cells]
    if np.any(T < 0):
        raise RuntimeError("negative cell temperature")
    s = np.sqrt(T)
    ensemble.vx[resample] = moments.ux[cells] + xi[resample, 0] * s
    ensemble.vy[resample] = moments.uy[cells] + xi[resample, 1] * s
    if params.enforce_conservation:
        _conserve(idx, ensemble.vx, ensemble.vy, resample, ensemble.omega, moments, moments.rho.size)
    return resample
