"""Quantities behind the stability statements: TV, l1/l2 norms, energy
ledger, discrete entropy and convergence-order fits."""

from __future__ import annotations

from dataclasses import astuple, dataclass
from typing import Callable, Sequence

import numpy as np

from .caputo import CaputoWeights, HistoryBuffer

__all__ = [
    "DiagnosticsRecord",
    "EnergyLedgerError",
    "total_variation",
    "l1_distance",
    "discrete_entropy",
    "record",
    "energy_decomposition",
    "convergence_slope",
    "grid_l1_error",
    "restrict_nested",
]


class EnergyLedgerError(AssertionError):
    pass


@dataclass(frozen=True)
class DiagnosticsRecord:
    level: int
    t: float
    tv: float
    l1_norm: float
    l2_norm_sq: float
    entropy_l2: float
    min_val: float
    max_val: float

    @classmethod
    def header(cls) -> list[str]:
        return ["level", "t", "tv", "l1", "l2sq", "entropy", "min", "max"]

    def row(self) -> tuple:
        return astuple(self)


def total_variation(state) -> float:
    u = np.asarray(state, dtype=float)
    if u.size < 2:
        raise ValueError("total variation needs at least two values")
    return float(np.abs(np.diff(u)).sum())


def l1_distance(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    return float(np.abs(u - v).sum())


def discrete_entropy(state, eta: Callable) -> float:
    """sum_j eta(U_j)."""
    return float(np.sum(eta(np.asarray(state, dtype=float))))


def record(state, level: int, t: float) -> DiagnosticsRecord:
    u = np.asarray(state, dtype=float)
    l2 = float(np.dot(u, u))
    return DiagnosticsRecord(
        level=level,
        t=t,
        tv=total_variation(u),
        l1_norm=float(np.abs(u).sum()),
        l2_norm_sq=l2,
        entropy_l2=l2,
        min_val=float(u.min()),
        max_val=float(u.max()),
    )


@dataclass(frozen=True)
class EnergyStep:
    level: int
    norm_sq: float
    memory_damping: float
    upwind_dissipation: float
    boundary_flux: float
    history_energy: float

    @property
    def imbalance(self) -> float:
        lhs = self.norm_sq + self.memory_damping + self.upwind_dissipation + self.boundary_flux
        return lhs - self.history_energy


def energy_decomposition(history: HistoryBuffer, weights_per_level: Sequence, lam: float,
                         periodic: bool = True, rtol: float = 1e-9) -> list[EnergyStep]:
    """Per-step l2 energy ledger of an implicit linear-advection run (a > 0).

    For each level n+1 >= 1 checks

        |U^{n+1}|^2 + sum_j sum_k c_k (U_j^{n+1} - U_j^k)^2
            + lam * sum_j (U_j^{n+1} - U_{j-1}^{n+1})^2 + boundary
        = sum_k c_k |U^k|^2

    where ``lam`` = a*Gamma(2-alpha)*dt^alpha/h.  The boundary term is
    zero for periodic data; for an outflow left ghost it is
    lam * (U_M^2 - U_0^2).  ``weights_per_level[n]`` holds the weights
    for level n+1.
    """
    h = history.values
    out = []
    for n in range(1, h.shape[0]):
        w = weights_per_level[n - 1]
        w = w.weights if isinstance(w, CaputoWeights) else np.asarray(w, dtype=float)
        if w.size != n:
            raise ValueError(f"weights for level {n} have length {w.size}")
        new = h[n]
        past = h[:n]
        norm_sq = float(new @ new)
        damping = float(w @ ((new[None, :] - past) ** 2).sum(axis=1))
        hist = float(w @ (past**2).sum(axis=1))
        if periodic:
            diffs = new - np.roll(new, 1)
            boundary = 0.0
        else:
            diffs = np.diff(new, prepend=new[0])
            boundary = lam * (new[-1] ** 2 - new[0] ** 2)
        dissipation = float(lam * (diffs @ diffs))
        entry = EnergyStep(n, norm_sq, damping, dissipation, float(boundary), hist)
        if abs(entry.imbalance) > rtol * max(hist, 1e-300):
            raise EnergyLedgerError(
                f"energy identity violated at level {n}: imbalance {entry.imbalance:.3e}"
            )
        out.append(entry)
    return out


def convergence_slope(errors: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(error) against log(resolution)."""
    pts = np.asarray(errors, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise ValueError("need at least three (resolution, error) pairs")
    if np.any(pts <= 0):
        raise ValueError("resolutions and errors must be positive")
    slope, _ = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)
    return float(slope)


def restrict_nested(fine, ratio: int) -> np.ndarray:
    """Values of a fine nested grid at the coarse nodes (every ratio-th node)."""
    if ratio < 1 or int(ratio) != ratio:
        raise ValueError("refinement ratio must be a positive integer")
    return np.asarray(fine)[:: int(ratio)]


def grid_l1_error(coarse, fine_reference, ratio: int, h: float) -> float:
    """h-weighted l1 distance to a reference on a nested finer grid."""
    ref = restrict_nested(fine_reference, ratio)
    return h * l1_distance(coarse, ref)
