"""Uniform node grid, fractional-order field and boundary ghosts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "ConfigurationError",
    "GridSpec",
    "AlphaField",
    "BoundaryTreatment",
    "sample_initial",
    "ghost_values",
    "pad",
]


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Nodes x_j = x_left + j*h, j = 0..M, with ``cells`` = M + 1.

    A periodic grid drops the right endpoint (it is the left one), so it
    has ``cells`` = M distinct nodes.
    """

    x_left: float
    x_right: float
    cells: int
    periodic: bool = False

    def __post_init__(self):
        if not self.x_right > self.x_left:
            raise ConfigurationError("x_right must exceed x_left")
        if self.cells < 3:
            raise ConfigurationError("need at least 3 nodes")

    @classmethod
    def from_spacing(cls, x_left: float, x_right: float, h: float,
                     periodic: bool = False) -> "GridSpec":
        m = (x_right - x_left) / h
        if abs(m - round(m)) > 1e-9 * max(1.0, m):
            raise ConfigurationError(f"h={h} does not divide [{x_left}, {x_right}]")
        m = int(round(m))
        return cls(float(x_left), float(x_right), m if periodic else m + 1, periodic)

    @property
    def h(self) -> float:
        intervals = self.cells if self.periodic else self.cells - 1
        return (self.x_right - self.x_left) / intervals

    @property
    def x(self) -> np.ndarray:
        return self.x_left + self.h * np.arange(self.cells)


@dataclass(frozen=True)
class AlphaField:
    """Fractional order, either a constant or a function alpha(x, t)."""

    kind: str = "constant"
    value: float = 1.0
    eval: Callable | None = None
    label: str = ""

    @classmethod
    def constant(cls, value: float) -> "AlphaField":
        value = float(value)
        if not 0.0 < value <= 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1], got {value}")
        return cls("constant", value, None, f"{value:g}")

    @classmethod
    def function(cls, fn: Callable, label: str = "alpha(x,t)") -> "AlphaField":
        return cls("function", float("nan"), fn, label)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def __call__(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_constant:
            return np.full(x.shape, self.value)
        a = np.broadcast_to(np.asarray(self.eval(x, t), dtype=float), x.shape)
        bad = ~((a > 0.0) & (a <= 1.0))
        if np.any(bad):
            raise ConfigurationError(
                f"alpha field {self.label} left (0, 1] at t={t}: "
                f"range [{a.min():.6g}, {a.max():.6g}]"
            )
        return a


BC_KINDS = ("outflow", "periodic", "dirichlet_from_initial")


@dataclass(frozen=True)
class BoundaryTreatment:
    kind: str = "outflow"
    # frozen (left, right) boundary values for dirichlet_from_initial
    frozen: tuple = field(default=(0.0, 0.0))

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ConfigurationError(f"unknown boundary kind {self.kind!r}")

    @classmethod
    def dirichlet(cls, initial) -> "BoundaryTreatment":
        initial = np.asarray(initial, dtype=float)
        return cls("dirichlet_from_initial", (float(initial[0]), float(initial[-1])))


def sample_initial(grid: GridSpec, u0: Callable) -> np.ndarray:
    """Pointwise values of ``u0`` at the nodes (no cell averaging)."""
    x = grid.x
    return np.asarray(u0(x), dtype=float) * np.ones_like(x)


def ghost_values(state, bc: BoundaryTreatment, side: str, width: int = 1) -> np.ndarray:
    """Ghost values beyond one end, ordered by increasing x."""
    state = np.asarray(state, dtype=float)
    if width not in (1, 2):
        raise ValueError("ghost width must be 1 or 2")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if bc.kind == "outflow":
        edge = state[0] if side == "left" else state[-1]
        return np.full(width, edge)
    if bc.kind == "periodic":
        return state[-width:].copy() if side == "left" else state[:width].copy()
    value = bc.frozen[0] if side == "left" else bc.frozen[1]
    return np.full(width, value)


def pad(state, bc: BoundaryTreatment, width: int) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    return np.concatenate(
        [ghost_values(state, bc, "left", width), state, ghost_values(state, bc, "right", width)]
    )
