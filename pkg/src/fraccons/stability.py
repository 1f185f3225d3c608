"""CFL bounds for the explicit schemes and the backward-Euler boundary locus."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .caputo import caputo_weights, step_scale, tilde_c

__all__ = [
    "CflBound",
    "cfl_max_dt",
    "cfl_ratio",
    "boundary_locus",
    "stability_polynomial",
    "stability_roots",
    "winding_number",
    "hausdorff_distance",
    "write_locus_csv",
]


@dataclass(frozen=True)
class CflBound:
    tau_max: float
    alpha: float
    h: float
    speed_sum: float
    order_factor: int

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.tau_max)

    def admits(self, dt: float) -> bool:
        return dt <= self.tau_max


def cfl_max_dt(alpha: float, h: float, speed_sum: float, order_factor: int = 1) -> CflBound:
    """Largest dt with order_factor * Gamma(2-alpha) * dt**alpha * speed / h <= c~.

    A zero ``speed_sum`` admits every step; ``tau_max`` is then ``inf``.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    if speed_sum < 0:
        raise ValueError("speed_sum must be nonnegative")
    if order_factor not in (1, 2):
        raise ValueError("order_factor is 1 (first order) or 2 (MUSCL)")
    if speed_sum == 0:
        return CflBound(math.inf, alpha, h, 0.0, order_factor)
    base = h * tilde_c(alpha) / (order_factor * math.gamma(2.0 - alpha) * speed_sum)
    return CflBound(base ** (1.0 / alpha), alpha, h, float(speed_sum), order_factor)


def cfl_ratio(alpha, dt: float, h: float, speed_sum: float, order_factor: int = 1) -> float:
    """Left side of the CFL inequality divided by c~; stable when <= 1.

    ``alpha`` may be an array (variable order); the worst cell is returned.
    """
    alpha = np.asarray(alpha, dtype=float)
    ct = 2.0 - 2.0 ** (1.0 - alpha)
    return float(np.max(order_factor * step_scale(alpha, dt) * speed_sum / (h * ct)))


def boundary_locus(alpha: float, n: int, theta_samples: int = 512) -> np.ndarray:
    """z(theta) = 1 - sum_k c_k exp(i(k-n-1)theta) on a uniform theta grid.

    The absolute-stability region of the fractional backward Euler method
    at level n+1 is the exterior of this curve, in the variable
    z = lam * Gamma(2-alpha) * dt**alpha.
    """
    if theta_samples < 8:
        raise ValueError("theta_samples must be >= 8")
    w = caputo_weights(alpha, n + 1).weights
    theta = 2.0 * np.pi * np.arange(theta_samples) / theta_samples
    k = np.arange(n + 1)
    phase = np.exp(1j * np.outer(theta, k - n - 1))
    return 1.0 - phase @ w


def stability_polynomial(alpha: float, n: int, z: complex) -> np.ndarray:
    """Coefficients (highest degree first) of (1-z) xi^{n+1} - sum_k c_k xi^k."""
    w = caputo_weights(alpha, n + 1).weights
    return np.concatenate([[1.0 - z], -w[::-1]])


def stability_roots(alpha: float, n: int, z: complex) -> np.ndarray:
    """Roots via companion-matrix eigenvalues; limited to n <= 30."""
    if n > 30:
        raise ValueError("root check is limited to n <= 30")
    coeffs = stability_polynomial(alpha, n, z)
    coeffs = coeffs / coeffs[0]
    deg = coeffs.size - 1
    companion = np.zeros((deg, deg), dtype=complex)
    companion[0, :] = -coeffs[1:]
    companion[1:, :-1] = np.eye(deg - 1)
    return np.linalg.eigvals(companion)


def winding_number(curve: np.ndarray, z: complex) -> int:
    """Winding number of the closed sampled curve around z."""
    d = np.asarray(curve) - z
    dphi = np.angle(np.roll(d, -1) / d)
    return int(round(dphi.sum() / (2.0 * np.pi)))


def hausdorff_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a)[:, None]
    b = np.asarray(b)[None, :]
    d = np.abs(a - b)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def write_locus_csv(path_or_file, alpha: float, n: int, theta_samples: int) -> np.ndarray:
    z = boundary_locus(alpha, n, theta_samples)
    theta = 2.0 * np.pi * np.arange(theta_samples) / theta_samples
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(["theta", "re_z", "im_z"])
        for t, zz in zip(theta, z):
            w.writerow([f"{t:.17g}", f"{zz.real:.17g}", f"{zz.imag:.17g}"])
    finally:
        if own:
            fh.close()
    return z
