"""Robust instantaneous magnetic feedback.

All per-node inputs are stacked as arrays of shape (n_nodes, N): row i holds
the particles of collocation node i, column m the same particle at every
node. The statistical operator reduces over rows, so the resulting control
does not depend on z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import ControlParams


@dataclass
class ControlField:
    """Piecewise-constant B_z on ``n_c`` horizontal slabs spanning all x."""

    values: np.ndarray
    y_edges: np.ndarray

    @classmethod
    def uniform_slabs(cls, y_min: float, y_max: float, n_c: int, values=None) -> "ControlField":
        edges = np.linspace(y_min, y_max, n_c + 1)
        vals = np.zeros(n_c) if values is None else np.broadcast_to(np.asarray(values, float), (n_c,)).copy()
        return cls(vals, edges)

    @property
    def n_c(self) -> int:
        return self.values.size

    def slab_of(self, y: np.ndarray) -> np.ndarray:
        k = np.searchsorted(self.y_edges, y, side="right") - 1
        return np.clip(k, 0, self.n_c - 1)

    def at(self, y: np.ndarray) -> np.ndarray:
        return self.values[self.slab_of(y)]

    def with_values(self, values) -> "ControlField":
        return ControlField(np.asarray(values, float), self.y_edges)


@dataclass
class StatOperator:
    kind: str
    weights: np.ndarray
    z0: int | None = None

    def __post_init__(self):
        if self.kind not in ("expectation", "worst-case"):
            raise ValueError(f"unknown statistical operator {self.kind!r}")
        if self.kind == "worst-case" and self.z0 is None:
            raise ValueError("worst-case operator needs the selected node z0")

    def apply(self, per_node: np.ndarray) -> np.ndarray:
        """Reduce over the leading (node) axis."""
        per_node = np.asarray(per_node)
        if per_node.shape[0] != self.weights.size:
            raise ValueError(f"{per_node.shape[0]} node values for {self.weights.size} weights")
        if self.kind == "expectation":
            return np.tensordot(self.weights, per_node, axes=1)
        return per_node[self.z0]


def select_worst_case_node(boundary_temps) -> int:
    """Index of the hottest node; ties go to the lowest index."""
    t = np.asarray(boundary_temps, dtype=float)
    if t.size == 0:
        raise ValueError("no collocation nodes to select from")
    return int(np.argmax(t))


def _node_means(a: np.ndarray) -> np.ndarray:
    return a.mean(axis=1, keepdims=True)


def _check(params: ControlParams) -> None:
    if not params.gamma > 0:
        raise ValueError("gamma must be positive")


def pointwise_feedback_limit(y, vx, vy, params: ControlParams, op: StatOperator) -> np.ndarray:
    """Per-particle B_m of the h -> 0 feedback law, clamped to [-M, M]."""
    _check(params)
    y, vx, vy = np.atleast_2d(y, vx, vy)
    r_x = (params.alpha_x * (y - params.y_hat) + params.beta_x * (y - _node_means(y))) * vx
    r_v = (params.alpha_v * vy + params.beta_v * (vy - _node_means(vy))) * vx
    return np.clip(op.apply(r_x + r_v) / params.gamma, -params.M, params.M)


def pointwise_feedback_discrete(y, vx, vy, ey, h: float, params: ControlParams, op: StatOperator) -> np.ndarray:
    """Per-particle B_m of the one-step feedback law, clamped to [-M, M]."""
    _check(params)
    y, vx, vy, ey = np.atleast_2d(y, vx, vy, ey)
    vy_e = vy + h * ey
    y_pred = y + h * vy_e
    r_x = (params.alpha_x * (y_pred - params.y_hat) + params.beta_x * (y_pred - _node_means(y))) * vx
    r_v = (params.alpha_v * vy_e + params.beta_v * (vy_e - _node_means(vy))) * vx
    s_x = (params.alpha_x + params.beta_x) * (h * vx) ** 2
    s_v = (params.alpha_v + params.beta_v) * h * vx**2
    raw = op.apply(r_x + r_v) / (params.gamma + op.apply(s_x + s_v))
    return np.clip(raw, -params.M, params.M)


def reference_positions(y, op: StatOperator) -> np.ndarray:
    """y used to assign particle m to a slab: node z0 (worst case) or the weighted mean."""
    return op.apply(np.atleast_2d(y))


def reference_x(x, op: StatOperator, x_min: float, length: float) -> np.ndarray:
    """Periodic counterpart of ``reference_positions`` (circular weighted mean)."""
    x = np.atleast_2d(x)
    if op.kind == "worst-case":
        return x[op.z0]
    phase = np.exp(2j * np.pi * (x - x_min) / length)
    ang = np.angle(np.tensordot(op.weights, phase, axes=1))
    return x_min + np.mod(ang, 2 * np.pi) * length / (2 * np.pi)


def interpolate_nearest_center(b, x_ref, y_ref, field: ControlField, x_center: float, M: float) -> ControlField:
    """Order-0 interpolation of the scattered B_m at the slab centres.

    Slab k takes the value of the particle (by reference position) closest to
    its centre (x_center, y_k); an empty slab gets 0.
    """
    k = field.slab_of(y_ref)
    yc = 0.5 * (field.y_edges[1:] + field.y_edges[:-1])
    d2 = (x_ref - x_center) ** 2 + (y_ref - yc[k]) ** 2
    vals = np.zeros(field.n_c)
    for j in range(field.n_c):
        sel = np.flatnonzero(k == j)
        if sel.size:
            vals[j] = b[sel[np.argmin(d2[sel])]]
    return field.with_values(np.clip(vals, -M, M))


def interpolate_cellwise(b: np.ndarray, y_ref: np.ndarray, field: ControlField, M: float) -> ControlField:
    """Slab average of the pointwise controls; an empty slab gets 0."""
    k = field.slab_of(y_ref)
    counts = np.bincount(k, minlength=field.n_c)
    sums = np.bincount(k, weights=b, minlength=field.n_c)
    vals = np.divide(sums, counts, out=np.zeros(field.n_c), where=counts > 0)
    return field.with_values(np.clip(vals, -M, M))


def cellwise_feedback_appendix(
    y, vx, vy, ey, h: float, params: ControlParams, op: StatOperator, field: ControlField, limit: bool = False
) -> ControlField:
    """Per-slab feedback computed directly from slab statistics of each node.

    Slab targets are (y_hat, 0) for every slab. A slab that is empty at some
    node contributes zero to that node's terms.
    """
    _check(params)
    y, vx, vy, ey = np.atleast_2d(y, vx, vy, ey)
    n_nodes = y.shape[0]
    n_c = field.n_c
    R = np.zeros((n_nodes, n_c))
    S = np.zeros((n_nodes, n_c))
    h_eff = 0.0 if limit else h
    for i in range(n_nodes):
        k = field.slab_of(y[i])
        nk = np.bincount(k, minlength=n_c).astype(float)
        if nk.sum() != y.shape[1]:
            raise RuntimeError("slab bookkeeping lost particles")
        occ = nk > 0

        def mean(a):
            return np.divide(np.bincount(k, weights=a, minlength=n_c), nk, out=np.zeros(n_c), where=occ)

        vx_i, vy_i, y_i = vx[i], vy[i], y[i]
        vy_e = vy_i + h_eff * ey[i]
        y_pred = y_i + h_eff * vy_e
        mx, my, mvy = mean(vx_i), mean(y_i), mean(vy_i)
        r_v = params.alpha_v * mean(vy_e) * mx + params.beta_v * mean((vy_e - mvy[k]) * vx_i)
        r_x = params.alpha_x * (mean(y_pred) - params.y_hat) * mx + params.beta_x * mean((y_pred - my[k]) * vx_i)
        R[i] = r_v + r_x
        if not limit:
            mvx2 = mean(vx_i**2)
            S[i] = h * (params.alpha_v * mx**2 + params.beta_v * mvx2) + h**2 * (
                params.alpha_x * mx**2 + params.beta_x * mvx2
            )
    raw = op.apply(R) / (params.gamma + op.apply(S))
    return field.with_values(np.clip(raw, -params.M, params.M))


def compute_control(
    params: ControlParams,
    op: StatOperator,
    field: ControlField,
    x,
    y,
    vx,
    vy,
    ey,
    h: float,
    x_range: tuple[float, float],
) -> ControlField:
    """Dispatch on ``params.method``; inputs are the post-collision node states.

    ``x_range`` is (x_min, x_max) of the periodic direction.
    """
    if params.method == "fixed":
        return field.with_values(np.full(field.n_c, params.B0))
    if params.method == "cellwise-appendix":
        return cellwise_feedback_appendix(
            y, vx, vy, ey, h, params, op, field, limit=params.appendix_form == "limit"
        )
    if params.method == "pointwise-limit":
        b = pointwise_feedback_limit(y, vx, vy, params, op)
    elif params.method == "pointwise-discrete":
        b = pointwise_feedback_discrete(y, vx, vy, ey, h, params, op)
    else:
        raise ValueError(f"unknown control method {params.method!r}")
    y_ref = reference_positions(y, op)
    if params.interpolation == "mean":
        return interpolate_cellwise(b, y_ref, field, params.M)
    x_min, x_max = x_range
    x_ref = reference_x(x, op, x_min, x_max - x_min)
    return interpolate_nearest_center(b, x_ref, y_ref, field, 0.5 * (x_min + x_max), params.M)
