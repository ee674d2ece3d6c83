"""Domain types shared by every stage of the solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Raised for an invalid run description (bad key, bad value)."""


@dataclass(frozen=True)
class PhaseDomain:
    """Rectangle periodic in x, specular-reflective in y."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    bc_x = "periodic"
    bc_y = "specular"

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ConfigError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if not self.y_max > self.y_min:
            raise ConfigError(f"y_max ({self.y_max}) must exceed y_min ({self.y_min})")

    @property
    def lx(self) -> float:
        return self.x_max - self.x_min

    @property
    def ly(self) -> float:
        return self.y_max - self.y_min


@dataclass(frozen=True)
class Mesh:
    domain: PhaseDomain
    m_x: int
    m_y: int

    def __post_init__(self):
        if self.m_x < 2 or self.m_y < 2:
            raise ConfigError(f"mesh needs at least 2x2 cells, got {self.m_x}x{self.m_y}")

    @property
    def dx(self) -> float:
        return self.domain.lx / self.m_x

    @property
    def dy(self) -> float:
        return self.domain.ly / self.m_y

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def n_cells(self) -> int:
        return self.m_x * self.m_y

    @property
    def shape(self) -> tuple[int, int]:
        """Grid arrays are indexed ``[ix, iy]``."""
        return (self.m_x, self.m_y)

    def x_centers(self) -> np.ndarray:
        return self.domain.x_min + (np.arange(self.m_x) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return self.domain.y_min + (np.arange(self.m_y) + 0.5) * self.dy

    def cell_indices(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Containing-cell indices; raises if any point lies outside the domain."""
        d = self.domain
        tol = 1e-12 * max(d.lx, d.ly)
        if x.size and (
            x.min() < d.x_min - tol
            or x.max() > d.x_max + tol
            or y.min() < d.y_min - tol
            or y.max() > d.y_max + tol
            or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)))
        ):
            raise ValueError("particle outside the domain; apply boundaries before depositing")
        ix = np.floor((x - d.x_min) / self.dx).astype(np.int64)
        iy = np.floor((y - d.y_min) / self.dy).astype(np.int64)
        np.clip(ix, 0, self.m_x - 1, out=ix)
        np.clip(iy, 0, self.m_y - 1, out=iy)
        return ix, iy

    def flat_index(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        ix, iy = self.cell_indices(x, y)
        return ix * self.m_y + iy


@dataclass
class ParticleEnsemble:
    """Equal-weight particles of one collocation node.

    Arrays are mutated in place by the collision and push stages.
    """

    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    omega: float
    node_index: int = 0

    def __post_init__(self):
        n = self.x.shape[0]
        if n < 1:
            raise ValueError("an ensemble needs at least one particle")
        for name in ("y", "vx", "vy"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected ({n},)")
        if not self.omega > 0:
            raise ValueError("particle weight must be positive")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def total_mass(self) -> float:
        return self.omega * self.n

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(
            self.x.copy(), self.y.copy(), self.vx.copy(), self.vy.copy(), self.omega, self.node_index
        )


@dataclass(frozen=True)
class CollisionParams:
    nu: float = 0.0
    enforce_conservation: bool = False

    def __post_init__(self):
        if not self.nu >= 0:
            raise ConfigError(f"collision frequency nu must be >= 0, got {self.nu}")


OPERATORS = ("worst-case", "expectation")
METHODS = ("pointwise-limit", "pointwise-discrete", "cellwise-appendix", "fixed")
APPENDIX_FORMS = ("discrete", "limit")
INTERPOLATIONS = ("nearest-center", "mean")


@dataclass(frozen=True)
class ControlParams:
    alpha_x: float = 5.0
    alpha_v: float = 15.0
    beta_x: float = 2.0
    beta_v: float = 12.0
    gamma: float = 2.5e-3
    M: float = 50.0
    y_hat: float = 0.75
    n_c: int = 4
    operator: str = "worst-case"
    method: str = "pointwise-limit"
    B0: float = 1.5
    appendix_form: str = "discrete"
    interpolation: str = "nearest-center"

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigError(f"control.gamma must be > 0, got {self.gamma}")
        if not self.M > 0:
            raise ConfigError(f"control.M must be > 0, got {self.M}")
        if self.n_c < 1:
            raise ConfigError(f"control.n_c must be >= 1, got {self.n_c}")
        for name in ("alpha_x", "alpha_v", "beta_x", "beta_v"):
            if getattr(self, name) < 0:
                raise ConfigError(f"control.{name} must be >= 0")
        if self.operator not in OPERATORS:
            raise ConfigError(f"control.operator must be one of {OPERATORS}, got {self.operator!r}")
        if self.method not in METHODS:
            raise ConfigError(f"control.method must be one of {METHODS}, got {self.method!r}")
        if self.appendix_form not in APPENDIX_FORMS:
            raise ConfigError(f"control.appendix_form must be one of {APPENDIX_FORMS}")
        if self.interpolation not in INTERPOLATIONS:
            raise ConfigError(f"control.interpolation must be one of {INTERPOLATIONS}")
        if self.method == "fixed" and abs(self.B0) > self.M:
            raise ConfigError(f"control.B0 = {self.B0} exceeds the bound M = {self.M}")


@dataclass(frozen=True)
class BoundaryBand:
    """Union of y-intervals adjacent to the walls where boundary statistics are taken."""

    intervals: tuple[tuple[float, float], ...]

    def row_mask(self, mesh: Mesh) -> np.ndarray:
        """Mesh rows (iy) whose cells intersect the band."""
        lo = mesh.domain.y_min + np.arange(mesh.m_y) * mesh.dy
        hi = lo + mesh.dy
        mask = np.zeros(mesh.m_y, dtype=bool)
        for a, b in self.intervals:
            mask |= (lo < b) & (hi > a)
        return mask


@dataclass
class ScenarioConfig:
    scenario: str
    domain: PhaseDomain
    mesh: Mesh
    N: int
    h: float
    t_f: float
    collision: CollisionParams
    control: ControlParams
    band: BoundaryBand
    n_z: int = 4
    z_fixed: float | None = None
    temperature_profile: str = "base"
    seed: int = 0
    snapshot_times: tuple[float, ...] = ()
    output_dir: str = "out"
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.h > 0:
            raise ConfigError(f"time step h must be > 0, got {self.h}")
        if not self.t_f >= self.h:
            raise ConfigError(f"t_f ({self.t_f}) must be >= h ({self.h})")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.n_z < 1:
            raise ConfigError("n_z must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_f / self.h))
