"""Time-marching loop shared by the CLI harness and the tests."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .caputo import HistoryBuffer
from .diagnostics import DiagnosticsRecord, record
from .schemes import SchemeConfig, StepReport, step

log = logging.getLogger(__name__)

__all__ = ["Simulation", "simulate", "default_record_every"]


def default_record_every(steps: int) -> int:
    """Every step up to 1000 steps, otherwise a stride keeping <= 1000 records."""
    return 1 if steps <= 1000 else -(-steps // 1000)


@dataclass
class Simulation:
    config: SchemeConfig
    history: HistoryBuffer
    records: list[DiagnosticsRecord] = field(default_factory=list)
    reports: list[StepReport] = field(default_factory=list)
    wall_time: float = 0.0
    cfl_warned: bool = False

    @property
    def final(self) -> np.ndarray:
        return self.history.latest.copy()

    @property
    def t(self) -> float:
        return (len(self.history) - 1) * self.config.dt

    @property
    def max_sweeps(self) -> int:
        return max((r.sweeps_used for r in self.reports), default=0)

    @property
    def max_cfl_ratio(self) -> float:
        return max((r.cfl_ratio for r in self.reports), default=0.0)

    def tv_series(self) -> np.ndarray:
        return np.array([r.tv for r in self.records])


def simulate(cfg: SchemeConfig, u0, steps: int, record_every: int | None = None,
             capacity: int | None = None) -> Simulation:
    """Advance ``u0`` by ``steps`` steps of ``cfg``.

    Diagnostics are recorded at level 0, every ``record_every`` levels and
    at the final level.
    """
    u0 = np.asarray(u0, dtype=float)
    if u0.size != cfg.grid.cells:
        raise ValueError(f"initial data has {u0.size} values, grid has {cfg.grid.cells}")
    if record_every is None:
        record_every = default_record_every(steps)
    hist = HistoryBuffer(u0, cfg.dt, capacity=capacity or steps + 1)
    sim = Simulation(cfg, hist)
    sim.records.append(record(u0, 0, 0.0))
    start = time.perf_counter()
    for n in range(1, steps + 1):
        # blow-ups are reported by NonFiniteStateError, not numpy warnings
        with np.errstate(over="ignore", invalid="ignore"):
            new, rep = step(hist, cfg)
        hist.append(new)
        sim.reports.append(rep)
        if rep.cfl_ratio > 1.0 and not sim.cfl_warned:
            log.warning("level %d: dt=%g exceeds the CFL bound (ratio %.4g)",
                        n, cfg.dt, rep.cfl_ratio)
            sim.cfl_warned = True
        if n % record_every == 0 or n == steps:
            sim.records.append(record(new, n, n * cfg.dt))
    sim.wall_time = time.perf_counter() - start
    return sim
