"""Lockstep evolution of the coupled collocation-node simulations."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import collisions, control, diagnostics, fields, pusher
from .collocation import CollocationSet, estimate_expectation, estimate_variance, fixed_node, gauss_legendre_nodes
from .domain import ParticleEnsemble, ScenarioConfig
from .rng import RngPolicy
from .sampling import sample_initial

log = logging.getLogger(__name__)


@dataclass
class EnsembleState:
    """Particle arrays of all nodes, stored as (n_nodes, N) blocks.

    ``nodes[i]`` is a ParticleEnsemble whose arrays are row views of the
    blocks, so in-place updates through either handle agree.
    """

    cset: CollocationSet
    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    omega: float
    control: control.ControlField
    step: int = 0
    nodes: list[ParticleEnsemble] = field(default_factory=list)

    def __post_init__(self):
        self.nodes = [
            ParticleEnsemble(self.x[i], self.y[i], self.vx[i], self.vy[i], self.omega, i)
            for i in range(self.cset.size)
        ]

    @classmethod
    def from_ensembles(cls, cset: CollocationSet, ensembles, control_field) -> "EnsembleState":
        omegas = {e.omega for e in ensembles}
        if len(omegas) != 1 or len({e.n for e in ensembles}) != 1:
            raise ValueError("all node ensembles must share N and the particle weight")
        stack = lambda name: np.stack([getattr(e, name) for e in ensembles])  # noqa: E731
        return cls(cset, stack("x"), stack("y"), stack("vx"), stack("vy"), omegas.pop(), control_field)

    @property
    def n_nodes(self) -> int:
        return self.cset.size


@dataclass
class StepRecord:
    t: float
    control: np.ndarray
    operator: str
    z0: int | None
    boundary_temps: np.ndarray
    far_overshoots: int = 0


def collocation_set_for(config: ScenarioConfig) -> CollocationSet:
    if config.z_fixed is not None:
        return fixed_node(config.z_fixed)
    return gauss_legendre_nodes(config.n_z)


def initial_state(config: ScenarioConfig, cset: CollocationSet | None = None, rng: RngPolicy | None = None):
    cset = cset or collocation_set_for(config)
    rng = rng or RngPolicy(config.seed)
    ensembles = [sample_initial(config, float(z), rng, i) for i, z in enumerate(cset.nodes)]
    d = config.domain
    field0 = control.ControlField.uniform_slabs(d.y_min, d.y_max, config.control.n_c)
    return EnsembleState.from_ensembles(cset, ensembles, field0)


def ensemble_step(state: EnsembleState, config: ScenarioConfig, rng: RngPolicy) -> StepRecord:
    """Advance every node by one step h and return what was applied."""
    mesh, h = config.mesh, config.h
    n = state.x.shape[1]
    t = state.step * h
    ey_p = np.empty_like(state.x)
    ex_p = np.empty_like(state.x)
    idx_all = []

    # (1) fields at t^n
    for i, node in enumerate(state.nodes):
        ix, iy = mesh.cell_indices(node.x, node.y)
        idx = ix * mesh.m_y + iy
        idx_all.append((idx, iy))
        rho = (np.bincount(idx, minlength=mesh.n_cells) * (node.omega / mesh.cell_area)).reshape(mesh.shape)
        fs = fields.solve_poisson(rho, mesh)
        ex_p[i] = fs.ex[ix, iy]
        ey_p[i] = fs.ey[ix, iy]

    # (2) collisions with draws shared by all nodes
    if config.collision.nu > 0:
        draws = collisions.collision_draws(rng, state.step, n)
        for i, node in enumerate(state.nodes):
            idx = idx_all[i][0]
            mom = collisions.moments_from_index(idx, node.omega, node.vx, node.vy, mesh.n_cells)
            collisions.bgk_collide(node, mom, config.collision, h, draws, idx)

    # (3) boundary temperature per node, on v*
    temps = np.array(
        [diagnostics.boundary_stats(node, mesh, config.band, iy=idx_all[i][1]).T_b for i, node in enumerate(state.nodes)]
    )

    # (4) shared control
    params = config.control
    z0 = control.select_worst_case_node(temps) if params.operator == "worst-case" else None
    op = control.StatOperator(params.operator, state.cset.weights, z0)
    d = config.domain
    state.control = control.compute_control(
        params, op, state.control, state.x, state.y, state.vx, state.vy, ey_p, h, (d.x_min, d.x_max)
    )

    # (5)-(6) push and boundaries
    far = 0
    for i, node in enumerate(state.nodes):
        b = state.control.at(node.y)
        pusher.push_semi_implicit(node, ex_p[i], ey_p[i], b, h)
        far += pusher.apply_boundaries(node, config.domain)

    state.step += 1
    return StepRecord(t, state.control.values.copy(), params.operator, z0, temps, far)


@dataclass
class RunResult:
    config: ScenarioConfig
    cset: CollocationSet
    times: np.ndarray
    boundary: list[list[diagnostics.BoundaryStats]]
    trace: list[StepRecord]
    snapshots: dict[float, tuple[np.ndarray, np.ndarray]]
    final_mean_rho: np.ndarray

    def energy_matrix(self) -> np.ndarray:
        """E_b with shape (n_times, n_nodes)."""
        return np.array([[s.E_b for s in row] for row in self.boundary])

    def energy_mean(self) -> np.ndarray:
        return estimate_expectation(self.energy_matrix().T, self.cset)

    def energy_std(self) -> np.ndarray:
        return np.sqrt(estimate_variance(self.energy_matrix().T, self.cset))


def _density_grids(state: EnsembleState, config: ScenarioConfig) -> np.ndarray:
    return np.stack([fields.deposit_density(node, config.mesh) for node in state.nodes])


def simulate(
    config: ScenarioConfig,
    cset: CollocationSet | None = None,
    t_end: float | None = None,
    state: EnsembleState | None = None,
) -> RunResult:
    """Run the configured scenario from t = 0 to ``t_end`` (default t_f)."""
    rng = RngPolicy(config.seed)
    cset = cset or collocation_set_for(config)
    state = state or initial_state(config, cset, rng)
    n_steps = config.n_steps if t_end is None else int(round(t_end / config.h))
    snap_steps = {int(round(t / config.h)): t for t in config.snapshot_times if t <= n_steps * config.h + 1e-12}

    times, boundary, trace, snaps = [], [], [], {}

    def record():
        times.append(state.step * config.h)
        boundary.append([diagnostics.boundary_stats(node, config.mesh, config.band) for node in state.nodes])
        if state.step in snap_steps:
            grids = _density_grids(state, config)
            snaps[snap_steps[state.step]] = (estimate_expectation(grids, cset), estimate_variance(grids, cset))

    record()
    for _ in range(n_steps):
        trace.append(ensemble_step(state, config, rng))
        record()
    far = sum(r.far_overshoots for r in trace)
    if far:
        log.warning("%d particle moves exceeded one domain length (time step too large for the velocities)", far)
    final = estimate_expectation(_density_grids(state, config), cset)
    return RunResult(config, cset, np.array(times), boundary, trace, snaps, final)
