"""CSV writers for run artifacts and the matching plot-script emitter.

Floats are written with ``repr`` so a read-back reproduces them exactly, and
missing values (empty cells, undefined moments) are empty fields. Nothing
time- or host-dependent goes into these files, so equal runs give equal bytes.

Schemas
-------
timeseries.csv   t,node,z,rho_b,ux_b,uy_b,E_b,T_b,empty
summary.csv      t,E_b_mean,E_b_std,T_b_mean
control.csv      t,B_1..B_nc,operator,z0
snapshot_*.csv   x_center,y_center,value   (row-major over x then y)
sweep.csv        n_z,err
compare.csv      t,E_b_mean[<variant>]...
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .domain import Mesh

TIMESERIES_HEADER = ("t", "node", "z", "rho_b", "ux_b", "uy_b", "E_b", "T_b", "empty")
SUMMARY_HEADER = ("t", "E_b_mean", "E_b_std", "T_b_mean")
SNAPSHOT_HEADER = ("x_center", "y_center", "value")
SWEEP_HEADER = ("n_z", "err")


def fmt(value) -> str:
    """Full-precision text for one CSV field; NaN/None become empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "" if math.isnan(v) else repr(v)
    return str(value)


def write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_rows(path: str | Path) -> tuple[list[str], list[list[float | str | None]]]:
    """Inverse of ``write_rows`` for numeric files (empty field -> None)."""

    def parse(s: str):
        if s == "":
            return None
        try:
            return float(s)
        except ValueError:
            return s

    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [[parse(s) for s in row] for row in r]


def write_timeseries(path, times, boundary, nodes) -> Path:
    """``boundary[k][i]`` is the BoundaryStats of node i at ``times[k]``."""
    rows = (
        (t, i, nodes[i], s.rho_b, s.ux_b, s.uy_b, s.E_b, s.T_b, s.empty)
        for t, row in zip(times, boundary)
        for i, s in enumerate(row)
    )
    return write_rows(path, TIMESERIES_HEADER, rows)


def write_summary(path, times, e_mean, e_std, t_mean) -> Path:
    return write_rows(path, SUMMARY_HEADER, zip(times, e_mean, e_std, t_mean))


def write_control(path, trace, n_c: int) -> Path:
    header = ("t", *(f"B_{k + 1}" for k in range(n_c)), "operator", "z0")
    rows = ((r.t, *r.control, r.operator, r.z0) for r in trace)
    return write_rows(path, header, rows)


def write_snapshot(path, grid: np.ndarray, mesh: Mesh) -> Path:
    grid = np.asarray(grid, dtype=float)
    if grid.shape != mesh.shape:
        raise ValueError(f"grid shape {grid.shape} does not match mesh {mesh.shape}")
    xc, yc = mesh.x_centers(), mesh.y_centers()
    rows = ((xc[i], yc[j], grid[i, j]) for i in range(mesh.m_x) for j in range(mesh.m_y))
    return write_rows(path, SNAPSHOT_HEADER, rows)


def read_snapshot(path, mesh: Mesh) -> np.ndarray:
    _, rows = read_rows(path)
    vals = [np.nan if r[2] is None else r[2] for r in rows]
    return np.array(vals, dtype=float).reshape(mesh.shape)


def snapshot_name(kind: str, t: float) -> str:
    return f"snapshot_{kind}_t{t:g}.csv"


def write_sweep(path, n_z_values, errors) -> Path:
    return write_rows(path, SWEEP_HEADER, zip(n_z_values, errors))


def write_compare(path, times, series: dict[str, np.ndarray]) -> Path:
    header = ("t", *(f"E_b_mean[{name}]" for name in series))
    cols = list(series.values())
    for name, col in series.items():
        if len(col) != len(times):
            raise ValueError(f"variant {name!r} has {len(col)} samples for {len(times)} times")
    return write_rows(path, header, ((t, *(c[k] for c in cols)) for k, t in enumerate(times)))


# --------------------------------------------------------------------------
# plot scripts

_PLOT_PRELUDE = '''\
"""Plots for the CSV outputs in this directory (generated file)."""
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = Path(__file__).resolve().parent


def load(name):
    with open(HERE / name, newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    cols = {}
    for k, h in enumerate(head):
        vals = [r[k] for r in body]
        try:
            cols[h] = np.array([float(v) if v != "" else np.nan for v in vals])
        except ValueError:
            cols[h] = np.array(vals)
    return cols


def grid(cols):
    xs, ys = np.unique(cols["x_center"]), np.unique(cols["y_center"])
    return xs, ys, cols["value"].reshape(xs.size, ys.size)

'''

_PLOT_RUN = '''
def plot_energy():
    s = load("summary.csv")
    fig, ax = plt.subplots()
    ax.plot(s["t"], s["E_b_mean"], label="mean")
    ax.fill_between(s["t"], s["E_b_mean"] - s["E_b_std"], s["E_b_mean"] + s["E_b_std"], alpha=0.3)
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("boundary thermal energy")
    fig.savefig(HERE / "energy.png", dpi=120)


def plot_control():
    c = load("control.csv")
    fig, ax = plt.subplots()
    for key in sorted(k for k in c if k.startswith("B_")):
        ax.step(c["t"], c[key], where="post", label=key)
    ax.set_xlabel("t")
    ax.set_ylabel("B")
    ax.legend()
    fig.savefig(HERE / "control.png", dpi=120)


def slab_values(ctrl, t):
    keys = sorted((k for k in ctrl if k.startswith("B_")), key=lambda k: int(k[2:]))
    if ctrl["t"].size == 0:
        return np.zeros(len(keys))
    k = int(np.argmin(np.abs(ctrl["t"] - t)))
    return np.array([ctrl[key][k] for key in keys])


def plot_snapshots(times, x_slice):
    ctrl = load("control.csv")
    for t in times:
        xs, ys, mean = grid(load(f"snapshot_mean_t{t:g}.csv"))
        _, _, var = grid(load(f"snapshot_var_t{t:g}.csv"))
        fig, (ax, bx) = plt.subplots(1, 2, gridspec_kw={"width_ratios": [12, 1]}, layout="constrained")
        im = ax.pcolormesh(xs, ys, mean.T, shading="nearest")
        fig.colorbar(im, ax=ax, label="E[rho]")
        b = slab_values(ctrl, t)
        edges = np.linspace(ys[0] - 0.5 * (ys[1] - ys[0]), ys[-1] + 0.5 * (ys[1] - ys[0]), b.size + 1)
        bi = bx.pcolormesh([0, 1], edges, b[:, None], cmap="coolwarm")
        fig.colorbar(bi, ax=bx, label="B per slab")
        bx.set_xticks([])
        ax.set_title(f"t = {t:g}")
        fig.savefig(HERE / f"heatmap_t{t:g}.png", dpi=120)
        plt.close(fig)

        i = int(np.argmin(np.abs(xs - x_slice)))
        std = np.sqrt(np.maximum(var[i], 0.0))
        fig, ax = plt.subplots()
        ax.plot(ys, mean[i])
        ax.fill_between(ys, mean[i] - std, mean[i] + std, alpha=0.3)
        ax.set_xlabel("y")
        ax.set_ylabel(f"E[rho](x = {xs[i]:.4g}, y)")
        fig.savefig(HERE / f"slice_t{t:g}.png", dpi=120)
        plt.close(fig)


if __name__ == "__main__":
    plot_energy()
    plot_control()
    plot_snapshots(SNAPSHOT_TIMES, X_SLICE)
'''

_PLOT_SWEEP = '''
def plot_sweep():
    s = load("sweep.csv")
    fig, ax = plt.subplots()
    ax.semilogy(s["n_z"], s["err"], "o-")
    ax.set_xlabel("N_z")
    ax.set_ylabel("max-norm error of E[rho]")
    fig.savefig(HERE / "sweep.png", dpi=120)


if __name__ == "__main__":
    plot_sweep()
'''

_PLOT_COMPARE = '''
def plot_compare():
    c = load("compare.csv")
    fig, ax = plt.subplots()
    for key in c:
        if key != "t":
            ax.plot(c["t"], c[key], label=key[len("E_b_mean["):-1])
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("mean boundary thermal energy")
    ax.legend()
    fig.savefig(HERE / "compare.png", dpi=120)


if __name__ == "__main__":
    plot_compare()
'''


def emit_plot_script(run_dir: str | Path, kind: str = "run", snapshot_times=(), x_slice: float = 0.75) -> Path:
    """Write ``plot.py`` into ``run_dir`` for a run, sweep or compare output.

    Raises FileNotFoundError naming every expected CSV that is absent.
    """
    run_dir = Path(run_dir)
    if kind == "run":
        needed = ["summary.csv", "control.csv"]
        for t in snapshot_times:
            needed += [snapshot_name("mean", t), snapshot_name("var", t)]
        body = (
            f"SNAPSHOT_TIMES = {[float(t) for t in snapshot_times]!r}\nX_SLICE = {float(x_slice)!r}\n" + _PLOT_RUN
        )
    elif kind == "sweep":
        needed, body = ["sweep.csv"], _PLOT_SWEEP
    elif kind == "compare":
        needed, body = ["compare.csv"], _PLOT_COMPARE
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    missing = [n for n in needed if not (run_dir / n).is_file()]
    if missing:
        raise FileNotFoundError(f"cannot emit plot script in {run_dir}, missing: {', '.join(missing)}")
    path = run_dir / "plot.py"
    path.write_text(_PLOT_PRELUDE + body)
    return path
