"""L1 discretization of the Caputo time derivative.

On a uniform time grid t^k = k*dt the operator at level n+1 reads

    D U^{n+1} = (U^{n+1} - sum_k c_k U^k) / (Gamma(2 - alpha) * dt**alpha)

where the weights c_0..c_n are positive and sum to one, so the memory part
is a convex combination of the stored history.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CaputoWeights",
    "HistoryBuffer",
    "caputo_weights",
    "weight_table",
    "tilde_c",
    "caputo_memory_term",
    "memory_term",
    "caputo_apply",
    "step_scale",
]


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 1.0) or math.isnan(alpha):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")


def _increments(beta: np.ndarray | float, n: int) -> np.ndarray:
    """Return d_m = (m+1)**beta - m**beta for m = 0..n.

    Written as m**beta * expm1(beta*log1p(1/m)) so that the later
    differences d_{m-1} - d_m do not lose digits for large m.
    """
    beta = np.asarray(beta, dtype=float)[..., None]
    m = np.arange(1, n + 1, dtype=float)
    tail = m**beta * np.expm1(beta * np.log1p(1.0 / m))
    head = np.ones(beta.shape[:-1] + (1,))
    return np.concatenate([head, tail], axis=-1)


@dataclass(frozen=True)
class CaputoWeights:
    alpha: float
    level: int
    weights: np.ndarray

    @property
    def tilde_c(self) -> float:
        return float(self.weights[-1])

    def __len__(self) -> int:
        return self.level


def caputo_weights(alpha: float, level: int) -> CaputoWeights:
    """Weights c_0..c_{level-1} of the L1 formula at time index ``level``.

    ``alpha == 1`` is returned as the degenerate (0, ..., 0, 1) vector so
    that every scheme reduces exactly to its classical counterpart.
    """
    _check_alpha(alpha)
    if level < 1 or int(level) != level:
        raise ValueError(f"level must be a positive integer, got {level!r}")
    level = int(level)
    if alpha == 1.0:
        w = np.zeros(level)
        w[-1] = 1.0
        return CaputoWeights(alpha, level, w)
    return CaputoWeights(alpha, level, weight_table(np.array([alpha]), level)[0])


def weight_table(alphas: np.ndarray, level: int) -> np.ndarray:
    """Per-cell weight rows, shape ``(len(alphas), level)``.

    Row j holds the weights for exponent ``alphas[j]``; used when the
    fractional order varies in space.
    """
    alphas = np.asarray(alphas, dtype=float)
    if np.any(~(alphas > 0.0)) or np.any(alphas > 1.0):
        raise ValueError("alpha values must lie in (0, 1]")
    n = level - 1
    d = _increments(1.0 - alphas, n)
    w = np.empty((alphas.size, level))
    # c_0 = d_n, c_k = d_{m-1} - d_m with m = n + 1 - k
    w[:, 0] = d[:, n]
    if n >= 1:
        w[:, 1:] = (d[:, :-1] - d[:, 1:])[:, ::-1]
    ones = alphas == 1.0
    if np.any(ones):
        w[ones] = 0.0
        w[ones, -1] = 1.0
    return w


def step_scale(alpha, dt: float):
    """Gamma(2 - alpha) * dt**alpha, the factor between D U^{n+1} and U^{n+1} - sum_k c_k U^k.

    Accepts an array of exponents.
    """
    alpha = np.asarray(alpha, dtype=float)
    gam = np.vectorize(math.gamma, otypes=[float])(2.0 - alpha)
    out = gam * dt**alpha
    return float(out) if out.ndim == 0 else out


def tilde_c(alpha: float) -> float:
    """Most recent weight 2 - 2**(1 - alpha); independent of the level."""
    _check_alpha(alpha)
    return 2.0 - 2.0 ** (1.0 - alpha)


class HistoryBuffer:
    """Append-only store of U^0..U^n.

    Levels live in one preallocated array that doubles when full, so the
    memory sum is a single matrix-vector product over a contiguous block.
    """

    def __init__(self, initial, dt: float, capacity: int = 64):
        initial = np.asarray(initial, dtype=float)
        if initial.ndim != 1:
            raise ValueError("history levels must be one-dimensional")
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.dt = float(dt)
        self.cell_count = initial.size
        self._data = np.empty((max(capacity, 2), self.cell_count))
        self._data[0] = initial
        self._len = 1

    def __len__(self) -> int:
        return self._len

    @property
    def values(self) -> np.ndarray:
        """Read-only view of shape (levels, cells)."""
        v = self._data[: self._len]
        v.flags.writeable = False
        return v

    @property
    def latest(self) -> np.ndarray:
        return self.values[-1]

    def __getitem__(self, k):
        return self.values[k]

    def append(self, level) -> None:
        level = np.asarray(level, dtype=float)
        if level.shape != (self.cell_count,):
            raise ValueError(
                f"level has shape {level.shape}, expected ({self.cell_count},)"
            )
        if self._len == self._data.shape[0]:
            grown = np.empty((2 * self._len, self.cell_count))
            grown[: self._len] = self._data[: self._len]
            self._data = grown
        self._data[self._len] = level
        self._len += 1


def _weight_array(weights) -> np.ndarray:
    if isinstance(weights, CaputoWeights):
        return weights.weights
    return np.asarray(weights, dtype=float)


def memory_term(history: HistoryBuffer, weights) -> np.ndarray:
    """sum_k c_k U^k for every cell.

    ``weights`` is either one vector shared by all cells or a per-cell
    table as returned by :func:`weight_table`.
    """
    w = _weight_array(weights)
    h = history.values
    if w.shape[-1] != h.shape[0]:
        raise ValueError(
            f"weights have {w.shape[-1]} levels but history holds {h.shape[0]}"
        )
    if w.ndim == 1:
        return w @ h
    if w.shape[0] != h.shape[1]:
        raise ValueError("per-cell weight table does not match cell count")
    return np.einsum("jk,kj->j", w, h)


def caputo_memory_term(history: HistoryBuffer, weights, cell: int) -> float:
    w = _weight_array(weights)
    if w.ndim != 1 or w.size != len(history):
        raise ValueError(
            f"weights have {w.size} levels but history holds {len(history)}"
        )
    if not 0 <= cell < history.cell_count:
        raise IndexError(f"cell {cell} out of range")
    return float(w @ history.values[:, cell])


def caputo_apply(history: HistoryBuffer, candidate_next, alpha: float, dt: float) -> np.ndarray:
    """Discrete Caputo derivative at the level that ``candidate_next`` would fill."""
    _check_alpha(alpha)
    if not dt > 0:
        raise ValueError("dt must be positive")
    candidate_next = np.asarray(candidate_next, dtype=float)
    if candidate_next.shape != (history.cell_count,):
        raise ValueError("candidate does not match the history cell count")
    w = caputo_weights(alpha, len(history))
    return (candidate_next - memory_term(history, w)) / step_scale(alpha, dt)
