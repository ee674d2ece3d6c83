"""Command line entry point: ``vpbgk run|sweep-nz|compare-control``.

Exit status is 0 on success, 2 for configuration problems and 1 for
failures during the run.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .collocation import collocation_error, estimate_expectation, gauss_legendre_nodes
from .config import PLAN_TABLES, _merge, apply_overrides, build_config, read_raw
from .domain import ConfigError, ScenarioConfig
from .ensemble import RunResult, simulate

log = logging.getLogger("vpbgk")

COMMANDS = ("run", "sweep-nz", "compare-control")
SWEEP_DEFAULTS = {"members": [2, 4, 8, 16], "reference": 32, "t_end": 0.2}


@dataclass
class RunPlan:
    command: str
    config_path: str | None
    overrides: list[str] = field(default_factory=list)
    out: str | None = None
    seed: int | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")

    def raw(self) -> dict:
        raw = read_raw(self.config_path) if self.config_path else {}
        raw = apply_overrides(raw, self.overrides)
        if self.seed is not None:
            raw["seed"] = self.seed
        return raw

    def out_dir(self, config: ScenarioConfig) -> Path:
        return Path(self.out or config.output_dir)


def _physics(raw: dict) -> dict:
    return {k: v for k, v in raw.items() if k not in PLAN_TABLES}


def _config_record(config: ScenarioConfig) -> dict:
    rec = asdict(config)
    rec["mesh"] = {"m_x": config.mesh.m_x, "m_y": config.mesh.m_y}
    return rec


def write_run(result: RunResult, out: Path) -> list[Path]:
    """Every per-run artifact, plus the plot script."""
    cfg = result.config
    out.mkdir(parents=True, exist_ok=True)
    nodes = result.cset.nodes
    temps = np.array([[s.T_b for s in row] for row in result.boundary])
    paths = [
        io.write_timeseries(out / "timeseries.csv", result.times, result.boundary, nodes),
        io.write_summary(
            out / "summary.csv",
            result.times,
            result.energy_mean(),
            result.energy_std(),
            estimate_expectation(temps.T, result.cset) if temps.size else [],
        ),
        io.write_control(out / "control.csv", result.trace, cfg.control.n_c),
    ]
    for t in sorted(result.snapshots):
        mean, var = result.snapshots[t]
        paths.append(io.write_snapshot(out / io.snapshot_name("mean", t), mean, cfg.mesh))
        paths.append(io.write_snapshot(out / io.snapshot_name("var", t), var, cfg.mesh))
    rec = out / "config.json"
    rec.write_text(json.dumps(_config_record(cfg), indent=2, sort_keys=True) + "\n")
    paths.append(rec)
    x_mid = 0.5 * (cfg.domain.x_min + cfg.domain.x_max)
    paths.append(io.emit_plot_script(out, "run", sorted(result.snapshots), x_slice=x_mid))
    return paths


def cmd_run(plan: RunPlan) -> int:
    config = build_config(_physics(plan.raw()))
    out = plan.out_dir(config)
    result = simulate(config)
    write_run(result, out)
    em = result.energy_mean()
    log.info("run finished: %d steps, final mean E_b %.6g, outputs in %s", len(result.trace), em[-1], out)
    return 0


def _sweep_plan(raw: dict) -> dict:
    plan = dict(SWEEP_DEFAULTS)
    for key, value in raw.get("sweep", {}).items():
        if key not in SWEEP_DEFAULTS:
            raise ConfigError(f"unknown config key 'sweep.{key}'")
        plan[key] = value
    members = [int(m) for m in plan["members"]]
    ref = int(plan["reference"])
    if not members:
        raise ConfigError("sweep.members must list at least one N_z")
    if any(m < 1 for m in members):
        raise ConfigError("sweep.members must be positive")
    bad = [m for m in members if m > ref]
    if bad:
        raise ConfigError(f"sweep.reference ({ref}) must be at least every member, got {bad}")
    return {"members": members, "reference": ref, "t_end": float(plan["t_end"])}


def _final_mean(args) -> tuple[np.ndarray, float]:
    config, n_z, t_end = args
    t0 = time.perf_counter()
    rho = simulate(config, gauss_legendre_nodes(n_z), t_end=t_end).final_mean_rho
    return rho, time.perf_counter() - t0


def run_sweep(config: ScenarioConfig, members, reference: int, t_end: float, jobs: int = 1):
    """Errors and wall times of each member against the reference run."""
    todo = [reference] + [m for m in members if m != reference]
    tasks = [(config, n, t_end) for n in todo]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_final_mean, tasks))
    else:
        done = [_final_mean(t) for t in tasks]
    by_nz = dict(zip(todo, done))
    ref_rho = by_nz[reference][0]
    errs = [collocation_error(by_nz[m][0], ref_rho) for m in members]
    walls = [by_nz[m][1] for m in members]
    return errs, walls


def cmd_sweep(plan: RunPlan) -> int:
    raw = plan.raw()
    sweep = _sweep_plan(raw)
    config = build_config(_physics(raw))
    out = plan.out_dir(config)
    errs, walls = run_sweep(config, sweep["members"], sweep["reference"], sweep["t_end"], plan.jobs)
    io.write_sweep(out / "sweep.csv", sweep["members"], errs)
    # timings vary between runs, so they live apart from the deterministic table
    io.write_rows(out / "sweep_timing.csv", ("n_z", "wall_time"), zip(sweep["members"], walls))
    io.emit_plot_script(out, "sweep")
    for m, e in zip(sweep["members"], errs):
        log.info("N_z = %d: err = %.6g", m, e)
    return 0


def _variants(raw: dict) -> dict[str, dict]:
    table = raw.get("compare", {})
    variants = table.get("variants") if isinstance(table, dict) else None
    extra = set(table) - {"variants"} if isinstance(table, dict) else set()
    if extra:
        raise ConfigError(f"unknown config key 'compare.{sorted(extra)[0]}'")
    if not variants or not isinstance(variants, dict):
        raise ConfigError("compare-control needs a [compare.variants.<name>] table per variant")
    for name, v in variants.items():
        if not isinstance(v, dict):
            raise ConfigError(f"config key 'compare.variants.{name}' must be a table")
    return variants


def cmd_compare(plan: RunPlan) -> int:
    raw = plan.raw()
    variants = _variants(raw)
    base = _physics(raw)
    configs = {name: build_config(_merge(base, v)) for name, v in variants.items()}
    grids = {(c.n_steps, c.h) for c in configs.values()}
    if len(grids) != 1:
        raise ConfigError("compare variants must share h and t_f so their time grids align")
    out = plan.out_dir(next(iter(configs.values())))
    results = {}
    for name, cfg in configs.items():
        log.info("variant %s", name)
        results[name] = simulate(cfg)
        write_run(results[name], out / name)
    times = next(iter(results.values())).times
    io.write_compare(out / "compare.csv", times, {n: r.energy_mean() for n, r in results.items()})
    io.emit_plot_script(out, "compare")
    return 0


HANDLERS = {"run": cmd_run, "sweep-nz": cmd_sweep, "compare-control": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vpbgk", description="Robust magnetic confinement under uncertainty (PIC + BGK).")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="TOML run description")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, e.g. control.gamma=1e-3 (repeatable)")
    p.add_argument("--out", help="output directory (default: output_dir from the config)")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep members (sweep-nz only)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _module_context(exc: BaseException) -> str:
    frames = [f for f in traceback.extract_tb(exc.__traceback__) if "vpbgk" in f.filename]
    if not frames:
        return "vpbgk"
    return "vpbgk." + Path(frames[-1].filename).stem


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return 2
    try:
        plan = RunPlan(args.command, args.config, args.overrides, args.out, args.seed, args.jobs)
        return HANDLERS[plan.command](plan)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - top-level reporting
        print(f"error in {_module_context(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
