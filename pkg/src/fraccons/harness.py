"""Run orchestration: single runs, parameter sweeps and their CSV output."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .diagnostics import DiagnosticsRecord, convergence_slope, grid_l1_error, l1_distance
from .mesh import ConfigurationError
from .runner import simulate
from .schemes import NonFiniteStateError, SweepNonConvergence
from .stability import cfl_max_dt

log = logging.getLogger(__name__)

OUT_ENV = "FRACCONS_OUT"
SWEEP_AXES = ("dt", "dx", "alpha")

__all__ = [
    "OUT_ENV",
    "RunReport",
    "SweepReport",
    "run",
    "sweep",
    "resolve_out_dir",
]


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


@dataclass
class RunReport:
    config: RunConfig
    records: list[DiagnosticsRecord]
    x: np.ndarray
    initial: np.ndarray
    final: np.ndarray
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    t_final: float = 0.0
    steps: int = 0
    wall_time: float = 0.0
    max_sweeps: int = 0
    max_cfl_ratio: float = 0.0
    max_principle_ok: bool = True
    output_dir: Path | None = None

    @property
    def tv_initial(self) -> float:
        return self.records[0].tv

    @property
    def tv_series(self) -> np.ndarray:
        return np.array([r.tv for r in self.records])

    @property
    def growth(self) -> float:
        """Largest recorded max-norm over the initial max-norm."""
        peak0 = max(abs(self.records[0].min_val), abs(self.records[0].max_val))
        peak = max(max(abs(r.min_val), abs(r.max_val)) for r in self.records)
        return peak / peak0 if peak0 > 0 else math.inf

    def summary(self) -> dict:
        return {
            "name": self.config.name,
            "steps": self.steps,
            "t_final": self.t_final,
            "tv_initial": self.tv_initial,
            "tv_final": self.records[-1].tv,
            "max_sweeps": self.max_sweeps,
            "max_cfl_ratio": self.max_cfl_ratio,
            "max_principle_ok": self.max_principle_ok,
            "wall_time": self.wall_time,
        }


def resolve_out_dir(config: RunConfig, out: str | os.PathLike | None = None) -> Path:
    """Explicit argument, then the environment variable, then the config key."""
    if out is None:
        out = os.environ.get(OUT_ENV) or config.out
    return Path(out)


def write_snapshot(path: Path, x: np.ndarray, u: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "u"])
        for xi, ui in zip(x, u):
            w.writerow([fmt(xi), fmt(ui)])


def write_diagnostics(path: Path, records: list[DiagnosticsRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DiagnosticsRecord.header())
        for r in records:
            w.writerow([fmt(v) for v in r.row()])


def _snapshot_levels(config: RunConfig, steps: int) -> list[int]:
    levels = {0, steps}
    for t in config.snapshot_times:
        levels.add(min(steps, int(round(float(t) / config.dt))))
    return sorted(levels)


def run(config: RunConfig, out: str | os.PathLike | None = None, write: bool = True) -> RunReport:
    """Step ``config`` to its final time and write CSV output.

    Files go to ``<out>/<name>/``: ``diagnostics.csv``, one
    ``snapshot_<level>.csv`` per requested time (always the initial and
    final levels) and ``summary.json``.
    """
    cfg = config.scheme_config()
    grid = cfg.grid
    u0 = config.initial_data()
    steps = config.steps
    sim = simulate(cfg, u0, steps, record_every=config.record_every)
    report = RunReport(
        config=config,
        records=sim.records,
        x=grid.x,
        initial=u0,
        final=sim.final,
        snapshots={k: np.array(sim.history[k]) for k in _snapshot_levels(config, steps)},
        t_final=steps * config.dt,
        steps=steps,
        wall_time=sim.wall_time,
        max_sweeps=sim.max_sweeps,
        max_cfl_ratio=sim.max_cfl_ratio,
        max_principle_ok=all(r.max_principle_ok for r in sim.reports),
    )
    if write:
        target = resolve_out_dir(config, out) / config.name
        try:
            target.mkdir(parents=True, exist_ok=True)
            write_diagnostics(target / "diagnostics.csv", report.records)
            for level, u in report.snapshots.items():
                write_snapshot(target / f"snapshot_{level:06d}.csv", grid.x, u)
            with open(target / "config.json", "w") as fh:
                json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
            with open(target / "summary.json", "w") as fh:
                json.dump(report.summary(), fh, indent=2)
        except OSError as exc:
            raise OSError(f"cannot write output to {target}: {exc}") from exc
        report.output_dir = target
    return report


@dataclass
class SweepRow:
    value: float
    status: str
    report: RunReport | None = None
    error: float = math.nan
    message: str = ""

    @property
    def stable(self) -> bool:
        if self.report is None:
            return False
        tv_ok = self.report.tv_series.max() <= self.report.tv_initial + 1e-8
        return tv_ok and self.report.growth < 10.0


@dataclass
class SweepReport:
    axis: str
    rows: list[SweepRow]
    slope: float | None = None
    threshold: tuple[float, float] | None = None
    cfl_bound: float | None = None
    output_dir: Path | None = None

    @property
    def reports(self) -> list[RunReport | None]:
        return [r.report for r in self.rows]

    def table(self) -> list[list[str]]:
        head = ["value", "status", "stable", "error", "tv_initial", "tv_final",
                "growth", "max_sweeps", "max_cfl_ratio"]
        out = [head]
        for r in self.rows:
            rep = r.report
            if rep is None:
                out.append([fmt(r.value), r.status, "0", fmt(r.error)] + ["nan"] * 5)
                continue
            out.append([
                fmt(r.value), r.status, fmt(r.stable), fmt(r.error),
                fmt(rep.tv_initial), fmt(rep.records[-1].tv), fmt(rep.growth),
                fmt(rep.max_sweeps), fmt(rep.max_cfl_ratio),
            ])
        return out


def _member(base: RunConfig, axis: str, value: float) -> RunConfig:
    name = f"{base.name}-{axis}-{value:.17g}"
    if axis == "dt":
        return base.replace(name=name, dt=float(value))
    if axis == "alpha":
        return base.replace(name=name, alpha=float(value))
    grid = dict(base.grid)
    grid.pop("cells", None)
    grid["h"] = float(value)
    return base.replace(name=name, grid=grid)


def _run_member(args) -> SweepRow:
    cfg, value, out = args
    try:
        return SweepRow(value, "ok", run(cfg, out=out))
    except NonFiniteStateError as exc:
        return SweepRow(value, "nonfinite", message=str(exc))
    except SweepNonConvergence as exc:
        return SweepRow(value, "sweep-failed", message=str(exc))


def _nested_ratio(h: float, h_ref: float) -> int:
    r = h / h_ref
    ratio = int(round(r))
    if abs(r - ratio) > 1e-9 * r:
        raise ConfigurationError(f"dx={h} is not an integer multiple of the reference {h_ref}")
    return ratio


def sweep(base: RunConfig, axis: str, values, out: str | os.PathLike | None = None,
          workers: int = 1, reference_ratio: int = 8) -> SweepReport:
    """Independent runs of ``base`` with ``axis`` set to each of ``values``.

    dx: errors against a reference run at min(dx)/reference_ratio, h-weighted
        l1 on the nested grid, and the fitted log-log slope.
    dt: per-run stability flag (TV never above TV0 + 1e-8, max-norm growth
        below 10x) and the empirical threshold between the last stable and
        the first unstable value.
    alpha: h-weighted l1 distance of each final profile to the alpha = 1 run.
    """
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    values = sorted(float(v) for v in values)
    if not values:
        raise ConfigurationError("sweep needs at least one value")
    root = resolve_out_dir(base, out) / f"{base.name}-sweep-{axis}"
    jobs = [(_member(base, axis, v), v, root) for v in values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_member, jobs))
    else:
        rows = [_run_member(j) for j in jobs]

    result = SweepReport(axis, rows, output_dir=root)
    if axis == "dx":
        h_ref = values[0] / reference_ratio
        ref = run(_member(base, "dx", h_ref).replace(name=f"{base.name}-reference"), out=root)
        pts = []
        for r in rows:
            if r.report is None:
                continue
            ratio = _nested_ratio(r.value, h_ref)
            r.error = grid_l1_error(r.report.final, ref.final, ratio, r.value)
            pts.append((r.value, r.error))
        if len(pts) >= 3 and all(e > 0 for _, e in pts):
            result.slope = convergence_slope(pts)
    elif axis == "dt":
        for prev, cur in zip(rows, rows[1:]):
            if prev.stable and not cur.stable:
                result.threshold = (prev.value, cur.value)
                break
        cfg = base.scheme_config()
        if cfg.scheme in ("explicit1", "muscl") and cfg.alpha.is_constant:
            u0 = base.initial_data()
            speed = cfg.flux.speed_sum(float(u0.min()), float(u0.max()))
            order = 2 if cfg.scheme == "muscl" else 1
            result.cfl_bound = cfl_max_dt(cfg.alpha.value, cfg.grid.h, speed, order).tau_max
    else:
        one = next((r for r in rows if r.value == 1.0 and r.report is not None), None)
        if one is None:
            one = _run_member((_member(base, "alpha", 1.0), 1.0, root))
        if one.report is not None:
            h = base.grid_spec().h
            for r in rows:
                if r.report is not None:
                    r.error = h * l1_distance(r.report.final, one.report.final)

    try:
        root.mkdir(parents=True, exist_ok=True)
        with open(root / "sweep.csv", "w", newline="") as fh:
            csv.writer(fh).writerows(result.table())
        with open(root / "sweep_summary.json", "w") as fh:
            json.dump({
                "axis": axis,
                "slope": result.slope,
                "threshold": result.threshold,
                "cfl_bound": result.cfl_bound,
            }, fh, indent=2)
    except OSError as exc:
        raise OSError(f"cannot write sweep output to {root}: {exc}") from exc
    return result
