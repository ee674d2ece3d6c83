"""Charge deposit, Poisson solve (periodic x, Neumann y) and field gather."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Mesh, ParticleEnsemble


@dataclass
class FieldState:
    rho: np.ndarray
    phi: np.ndarray
    ex: np.ndarray
    ey: np.ndarray


def deposit_density(ensemble: ParticleEnsemble, mesh: Mesh) -> np.ndarray:
    """Nearest-grid-point mass density, shape ``mesh.shape``."""
    idx = mesh.flat_index(ensemble.x, ensemble.y)
    counts = np.bincount(idx, minlength=mesh.n_cells).astype(float)
    return (counts * (ensemble.omega / mesh.cell_area)).reshape(mesh.shape)


def _neumann_tridiag_solve(lam: np.ndarray, rhs: np.ndarray, dy: float) -> np.ndarray:
    """Solve (-D_yy + lam) u = rhs for every x-mode at once.

    ``rhs`` has shape (n_modes, m_y); ``lam`` has shape (n_modes,). The y
    operator is the cell-centred 3-point stencil with mirrored ghost cells.
    A zero ``lam`` leaves the system singular, so its first row is replaced by
    u_0 = 0; the caller removes the mean afterwards.
    """
    n_modes, m = rhs.shape
    inv = 1.0 / dy**2
    lower = np.full((n_modes, m), -inv)
    upper = np.full((n_modes, m), -inv)
    diag = np.empty((n_modes, m))
    diag[:] = 2.0 * inv + lam[:, None]
    diag[:, 0] -= inv
    diag[:, -1] -= inv
    lower[:, 0] = 0.0
    upper[:, -1] = 0.0
    rhs = rhs.astype(complex, copy=True)

    singular = lam == 0.0
    if np.any(singular):
        diag[singular, 0] = 1.0
        upper[singular, 0] = 0.0
        rhs[singular, 0] = 0.0

    # Thomas elimination, vectorised over modes.
    c = np.empty((n_modes, m))
    d = np.empty((n_modes, m), dtype=complex)
    c[:, 0] = upper[:, 0] / diag[:, 0]
    d[:, 0] = rhs[:, 0] / diag[:, 0]
    for j in range(1, m):
        denom = diag[:, j] - lower[:, j] * c[:, j - 1]
        if np.any(denom == 0.0):
            raise RuntimeError("singular Poisson mode encountered")
        c[:, j] = upper[:, j] / denom
        d[:, j] = (rhs[:, j] - lower[:, j] * d[:, j - 1]) / denom
    u = np.empty_like(d)
    u[:, -1] = d[:, -1]
    for j in range(m - 2, -1, -1):
        u[:, j] = d[:, j] - c[:, j] * u[:, j + 1]
    return u


def solve_potential(source: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Zero-mean phi with -Lap_h phi = source - mean(source)."""
    if not np.all(np.isfinite(source)):
        raise ValueError("Poisson right-hand side contains non-finite values")
    rhs = source - source.mean()
    rhs_hat = np.fft.rfft(rhs, axis=0)
    k = np.arange(rhs_hat.shape[0])
    lam = (2.0 - 2.0 * np.cos(2.0 * np.pi * k / mesh.m_x)) / mesh.dx**2
    lam[0] = 0.0
    phi_hat = _neumann_tridiag_solve(lam, rhs_hat, mesh.dy)
    phi = np.fft.irfft(phi_hat, n=mesh.m_x, axis=0)
    return phi - phi.mean()


def electric_field(phi: np.ndarray, mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """E = -grad phi: centred differences, periodic in x, one-sided at the y walls."""
    ex = -(np.roll(phi, -1, axis=0) - np.roll(phi, 1, axis=0)) / (2.0 * mesh.dx)
    ey = np.empty_like(phi)
    ey[:, 1:-1] = -(phi[:, 2:] - phi[:, :-2]) / (2.0 * mesh.dy)
    if mesh.m_y >= 3:
        ey[:, 0] = -(-3.0 * phi[:, 0] + 4.0 * phi[:, 1] - phi[:, 2]) / (2.0 * mesh.dy)
        ey[:, -1] = -(3.0 * phi[:, -1] - 4.0 * phi[:, -2] + phi[:, -3]) / (2.0 * mesh.dy)
    else:
        ey[:, 0] = ey[:, -1] = -(phi[:, 1] - phi[:, 0]) / mesh.dy
    return ex, ey


def solve_poisson(rho: np.ndarray, mesh: Mesh) -> FieldState:
    """Field of the electron density against the unit ion background.

    The ion term only shifts the right-hand side by a constant, which the
    compatibility (zero-mean) projection removes anyway.
    """
    phi = solve_potential(rho - 1.0, mesh)
    ex, ey = electric_field(phi, mesh)
    return FieldState(rho=rho, phi=phi, ex=ex, ey=ey)


def laplacian_h(phi: np.ndarray, mesh: Mesh) -> np.ndarray:
    """The 5-point operator the solver inverts (periodic x, mirrored ghosts in y)."""
    lap_x = (np.roll(phi, -1, axis=0) - 2.0 * phi + np.roll(phi, 1, axis=0)) / mesh.dx**2
    padded = np.concatenate((phi[:, :1], phi, phi[:, -1:]), axis=1)
    lap_y = (padded[:, 2:] - 2.0 * phi + padded[:, :-2]) / mesh.dy**2
    return lap_x + lap_y


def gather_field(field: FieldState, ensemble: ParticleEnsemble, mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    ix, iy = mesh.cell_indices(ensemble.x, ensemble.y)
    return field.ex[ix, iy], field.ey[ix, iy]
