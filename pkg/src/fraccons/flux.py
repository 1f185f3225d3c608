"""Split fluxes f = f+ + f- with (f+)' >= 0 and (f-)' <= 0, and slope limiters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["FluxModel", "linear_advection", "burgers", "limiter", "limiter_array"]


@dataclass(frozen=True)
class FluxModel:
    """Monotone flux splitting.

    ``f_plus``/``f_minus`` must accept scalars and numpy arrays.  The
    optional derivatives are used by the implicit solver's Newton step; it
    falls back to bisection without them.
    """

    name: str
    f_plus: Callable
    f_minus: Callable
    dfplus_bound: Callable[[float, float], float]
    dfminus_bound: Callable[[float, float], float]
    df_plus: Callable | None = None
    df_minus: Callable | None = None
    linear_speed: float | None = None

    def __call__(self, u):
        return self.f_plus(u) + self.f_minus(u)

    def speed_sum(self, u_min: float, u_max: float) -> float:
        return self.dfplus_bound(u_min, u_max) + self.dfminus_bound(u_min, u_max)


def linear_advection(a: float) -> FluxModel:
    a = float(a)
    if not np.isfinite(a):
        raise ValueError("wave speed must be finite")
    zero = lambda u: 0.0 * u  # noqa: E731
    if a >= 0:
        return FluxModel(
            name=f"linear(a={a:g})",
            f_plus=lambda u: a * u,
            f_minus=zero,
            dfplus_bound=lambda lo, hi: abs(a),
            dfminus_bound=lambda lo, hi: 0.0,
            df_plus=lambda u: a,
            df_minus=lambda u: 0.0,
            linear_speed=a,
        )
    return FluxModel(
        name=f"linear(a={a:g})",
        f_plus=zero,
        f_minus=lambda u: a * u,
        dfplus_bound=lambda lo, hi: 0.0,
        dfminus_bound=lambda lo, hi: abs(a),
        df_plus=lambda u: 0.0,
        df_minus=lambda u: a,
        linear_speed=a,
    )


def _burgers_plus(u):
    if isinstance(u, np.ndarray):
        p = np.maximum(u, 0.0)
        return 0.5 * p * p
    return 0.5 * u * u if u > 0 else 0.0


def _burgers_minus(u):
    if isinstance(u, np.ndarray):
        m = np.minimum(u, 0.0)
        return 0.5 * m * m
    return 0.5 * u * u if u < 0 else 0.0


def burgers() -> FluxModel:
    """f(u) = u**2/2 split by the sign of u."""
    return FluxModel(
        name="burgers",
        f_plus=_burgers_plus,
        f_minus=_burgers_minus,
        dfplus_bound=lambda lo, hi: max(0.0, hi),
        dfminus_bound=lambda lo, hi: max(0.0, -lo),
        df_plus=lambda u: u if u > 0 else 0.0,
        df_minus=lambda u: u if u < 0 else 0.0,
    )


LIMITERS = ("minmod", "van_leer")


def limiter(kind: str, theta: float) -> float:
    """phi(theta) for the minmod or van Leer limiter; zero for theta <= 0."""
    return float(limiter_array(kind, np.asarray(theta, dtype=float)))


def limiter_array(kind: str, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if kind == "minmod":
        return np.maximum(0.0, np.minimum(1.0, theta))
    if kind == "van_leer":
        pos = np.where(theta > 0.0, theta, 0.0)
        return 2.0 * pos / (1.0 + pos)
    raise ValueError(f"unknown limiter {kind!r}; expected one of {LIMITERS}")
