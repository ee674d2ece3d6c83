"""First-order semi-implicit push and wall/periodic boundary handling."""

from __future__ import annotations

import logging

import numpy as np

from .domain import ParticleEnsemble, PhaseDomain

log = logging.getLogger(__name__)

MAX_REFLECTIONS = 4


def implicit_velocity(vx, vy, ex, ey, b, h):
    """Exact solution of v' = v* + h (v' x B e_z + E) for scalar B.

    With w = v* + hE the system reads vx' = wx + hB vy', vy' = wy - hB vx'.
    """
    wx = vx + h * ex
    wy = vy + h * ey
    hb = h * b
    denom = 1.0 + hb * hb
    return (wx + hb * wy) / denom, (wy - hb * wx) / denom


def push_semi_implicit(ensemble: ParticleEnsemble, ex, ey, b, h: float) -> None:
    """Advance velocities (from v*) and positions of ``ensemble`` in place."""
    vx, vy = implicit_velocity(ensemble.vx, ensemble.vy, ex, ey, b, h)
    ensemble.vx[:] = vx
    ensemble.vy[:] = vy
    ensemble.x += h * vx
    ensemble.y += h * vy


def apply_boundaries(ensemble: ParticleEnsemble, domain: PhaseDomain) -> int:
    """Wrap x periodically and reflect y specularly, in place.

    Returns the number of particles that overshot by more than one domain
    length (a time-step/CFL problem); callers aggregate and report it.
    """
    x, y, vy = ensemble.x, ensemble.y, ensemble.vy
    lo, hi = domain.y_min, domain.y_max
    far = int(np.count_nonzero((y > hi + domain.ly) | (y < lo - domain.ly)))
    far += int(np.count_nonzero(np.abs(x - domain.x_min - 0.5 * domain.lx) > 1.5 * domain.lx))
    if far:
        log.debug("%d particles moved more than one domain length in a step", far)

    x[:] = domain.x_min + np.mod(x - domain.x_min, domain.lx)
    x[x >= domain.x_max] = domain.x_min

    for _ in range(MAX_REFLECTIONS):
        above = y > hi
        below = y < lo
        if not (above.any() or below.any()):
            break
        y[above] = 2.0 * hi - y[above]
        vy[above] = -vy[above]
        y[below] = 2.0 * lo - y[below]
        vy[below] = -vy[below]
    else:
        out = (y > hi) | (y < lo)
        if out.any():
            vy[out] = np.where(y[out] > hi, -np.abs(vy[out]), np.abs(vy[out]))
            np.clip(y, lo, hi, out=y)
    return far
