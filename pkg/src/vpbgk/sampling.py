"""Initial-condition samplers for the Sod and Kelvin-Helmholtz scenarios.

Positions and the standard-normal velocity seeds come from node-independent
streams; only the temperature scaling depends on the random parameter z, so
particle m is the same particle at every collocation node.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .domain import ConfigError, ParticleEnsemble, ScenarioConfig
from .rng import RngPolicy

SOD_DOMAIN = (0.0, 1.5, 0.0, 1.5)
SOD_STRIPE = (0.5, 1.0)
SOD_RHO = (0.125, 1.0)

# (outer stripes, central stripe) temperatures; "base" is z-dependent.
SOD_PROFILES = {
    "tilde": (1.0, 10.0),
    "bar": (5.0, 50.0),
    "hat": (10.0, 100.0),
}

KH_K0 = 0.15
KH_EPS0 = 0.1
KH_EPS1 = 0.001
KH_UX = 1.0
KH_WIDTH = 0.9
KH_AMPLITUDE = 1.5 / (2.0 * np.pi)
KH_TABLE = 4096


def sod_temperature(y: np.ndarray, z: float, profile: str = "base") -> np.ndarray:
    inside = (y >= SOD_STRIPE[0]) & (y <= SOD_STRIPE[1])
    if profile == "base":
        t_out, t_in = 0.1 + 0.25 * z, 1.0 + 0.25 * z
    elif profile in SOD_PROFILES:
        t_out, t_in = SOD_PROFILES[profile]
    else:
        raise ConfigError(f"unknown temperature_profile {profile!r}")
    return np.where(inside, t_in, t_out)


def sod_density(y: np.ndarray) -> np.ndarray:
    inside = (y >= SOD_STRIPE[0]) & (y <= SOD_STRIPE[1])
    return np.where(inside, SOD_RHO[1], SOD_RHO[0])


def _piecewise_inverse_cdf(u: np.ndarray, edges: np.ndarray, dens: np.ndarray) -> np.ndarray:
    mass = np.concatenate(([0.0], np.cumsum(dens * np.diff(edges))))
    return np.interp(u * mass[-1], mass, edges)


def _check_sod_domain(config: ScenarioConfig) -> None:
    d = config.domain
    if (d.x_min, d.x_max, d.y_min, d.y_max) != SOD_DOMAIN:
        raise ConfigError(
            f"sod2d requires the domain [0,1.5]^2, got [{d.x_min},{d.x_max}]x[{d.y_min},{d.y_max}]"
        )


def sod_total_mass() -> float:
    lx = SOD_DOMAIN[1] - SOD_DOMAIN[0]
    inner = SOD_STRIPE[1] - SOD_STRIPE[0]
    outer = (SOD_DOMAIN[3] - SOD_DOMAIN[2]) - inner
    return lx * (SOD_RHO[1] * inner + SOD_RHO[0] * outer)


def sample_sod(config: ScenarioConfig, z: float, rng: RngPolicy | None = None, node_index: int = 0):
    if config.scenario != "sod2d":
        raise ConfigError(f"sample_sod called for scenario {config.scenario!r}")
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"random node z = {z} outside [0, 1]")
    _check_sod_domain(config)
    rng = rng or RngPolicy(config.seed)
    n = config.N
    d = config.domain

    x = d.x_min + d.lx * rng.uniforms("init-x", 0, n)
    edges = np.array([d.y_min, SOD_STRIPE[0], SOD_STRIPE[1], d.y_max])
    dens = np.array([SOD_RHO[0], SOD_RHO[1], SOD_RHO[0]])
    y = _piecewise_inverse_cdf(rng.uniforms("init-y", 0, n), edges, dens)

    xi = rng.normals("init-v", 0, n)
    s = np.sqrt(sod_temperature(y, z, config.temperature_profile))
    return ParticleEnsemble(x, y, s * xi[:, 0], s * xi[:, 1], sod_total_mass() / n, node_index)


def _gd(u):
    return 2.0 * np.arctan(np.tanh(0.5 * u))


def _gd_inv(g):
    return 2.0 * np.arctanh(np.tan(0.5 * g))


def kh_x_profile(x: np.ndarray, eps0: float = KH_EPS0, eps1: float = KH_EPS1, k0: float = KH_K0):
    return 1.0 + eps0 * np.cos(3.0 * k0 * x + eps1 * np.sin(k0 * x))


def kh_density(x, y, eps0: float = KH_EPS0, eps1: float = KH_EPS1):
    return KH_AMPLITUDE / np.cosh(y / KH_WIDTH) * kh_x_profile(x, eps0, eps1)


def _kh_eps(config: ScenarioConfig) -> tuple[float, float]:
    return float(config.extras.get("kh_eps0", KH_EPS0)), float(config.extras.get("kh_eps1", KH_EPS1))


def kh_total_mass(config: ScenarioConfig, eps0: float | None = None, eps1: float | None = None) -> float:
    """Integral of the initial density; the perturbation defaults to the config's."""
    c0, c1 = _kh_eps(config)
    eps0 = c0 if eps0 is None else eps0
    eps1 = c1 if eps1 is None else eps1
    d = config.domain
    ymass = KH_WIDTH * (_gd(d.y_max / KH_WIDTH) - _gd(d.y_min / KH_WIDTH))
    xmass = quad(kh_x_profile, d.x_min, d.x_max, args=(eps0, eps1), limit=200)[0]
    return KH_AMPLITUDE * ymass * xmass


def sample_kh(config: ScenarioConfig, z: float, rng: RngPolicy | None = None, node_index: int = 0):
    """Kelvin-Helmholtz shear layer: counter-streaming halves, sech density in y."""
    if config.scenario != "kelvin-helmholtz":
        raise ConfigError(f"sample_kh called for scenario {config.scenario!r}")
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"random node z = {z} outside [0, 1]")
    rng = rng or RngPolicy(config.seed)
    eps0, eps1 = _kh_eps(config)
    n = config.N
    d = config.domain

    # The density factorizes, so one x-table serves every y-row.
    grid = np.linspace(d.x_min, d.x_max, KH_TABLE)
    pdf = kh_x_profile(grid, eps0, eps1)
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))))
    if not np.all(np.diff(cdf) > 0):
        raise RuntimeError("x-density table is not strictly positive; perturbation too large")
    x = np.interp(rng.uniforms("init-x", 0, n) * cdf[-1], cdf, grid)

    g_lo, g_hi = _gd(d.y_min / KH_WIDTH), _gd(d.y_max / KH_WIDTH)
    y = KH_WIDTH * _gd_inv(g_lo + (g_hi - g_lo) * rng.uniforms("init-y", 0, n))
    np.clip(y, d.y_min, d.y_max, out=y)

    temp = 0.15 + 0.25 * z
    xi = rng.normals("init-v", 0, n)
    ux = np.where(y >= 0.0, -KH_UX, KH_UX)
    s = np.sqrt(temp)
    return ParticleEnsemble(
        x, y, ux + s * xi[:, 0], s * xi[:, 1], kh_total_mass(config, eps0, eps1) / n, node_index
    )


SAMPLERS = {"sod2d": sample_sod, "kelvin-helmholtz": sample_kh}


def sample_initial(config: ScenarioConfig, z: float, rng: RngPolicy | None = None, node_index: int = 0):
    try:
        sampler = SAMPLERS[config.scenario]
    except KeyError:
        raise ConfigError(f"no initial-condition sampler for scenario {config.scenario!r}") from None
    return sampler(config, z, rng, node_index)
