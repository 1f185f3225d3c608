"""Mittag-Leffler function by direct series summation.

Only moderate real arguments are supported.  Terms are formed in log
space; when the partial sums cancel heavily (negative arguments) the sum is
carried out in extended precision with mpmath so the result keeps its
digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

__all__ = [
    "MittagLefflerParams",
    "MittagLefflerConvergenceError",
    "mittag_leffler",
    "fode_exact_solution",
]


class MittagLefflerConvergenceError(ArithmeticError):
    """The truncated series did not reach its tolerance within max_terms."""


@dataclass(frozen=True)
class MittagLefflerParams:
    max_terms: int = 400
    tol: float = 1e-14

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


DEFAULT_PARAMS = MittagLefflerParams()


def _log_term(n: int, logz: float, alpha: float) -> float:
    return n * logz - math.lgamma(alpha * n + 1.0)


def mittag_leffler(alpha: float, z: float, params: MittagLefflerParams = DEFAULT_PARAMS) -> float:
    r"""E_alpha(z) = \sum_n z^n / Gamma(alpha n + 1) for real z."""
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    z = float(z)
    if z == 0.0:
        return 1.0

    logz = math.log(abs(z))
    negative = z < 0
    n_stop = None
    peak = 0.0
    for n in range(params.max_terms):
        lt = _log_term(n, logz, alpha)
        peak = max(peak, lt)
        # terms decay monotonically once past the peak
        if lt < math.log(params.tol) and n > 0 and lt < _log_term(n - 1, logz, alpha):
            n_stop = n
            break
    if n_stop is None:
        raise MittagLefflerConvergenceError(
            f"E_{alpha}({z}) did not converge within {params.max_terms} terms"
        )

    if not negative:
        return math.fsum(math.exp(_log_term(n, logz, alpha)) for n in range(n_stop))

    # alternating series: the largest term sets the digits lost to cancellation
    dps = 20 + int(peak / math.log(10.0)) + 1
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        a = mpmath.mpf(alpha)
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)
        for n in range(n_stop):
            total += power / mpmath.gamma(a * n + 1)
            power *= zz
        return float(total)


def fode_exact_solution(alpha: float, lam: float, u0: float, t: float,
                        params: MittagLefflerParams = DEFAULT_PARAMS) -> float:
    """Solution u0 * E_alpha(lam * t**alpha) of D^alpha u = lam * u."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return float(u0)
    return u0 * mittag_leffler(alpha, lam * t**alpha, params)
