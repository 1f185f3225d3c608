"""Time steppers for D^alpha u = lam*u and D^alpha u + f(u)_x = 0.

Every step consumes the full history U^0..U^n and returns U^{n+1}; the
caller appends it.  With delta = Gamma(2-alpha) * dt**alpha / h and
b = sum_k c_k U^k the three conservation-law schemes read

    explicit1:  U^{n+1}_j = b_j - delta * (F+_j - F+_{j-1} + F-_{j+1} - F-_j)
    muscl:      same, with limited reconstructed interface fluxes
    implicit:   U^{n+1}_j + delta * (F+_j - F+_{j-1} + F-_{j+1} - F-_j) = b_j
                with every flux evaluated at the new level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import spsolve

from .caputo import HistoryBuffer, caputo_weights, memory_term, step_scale, weight_table
from .flux import FluxModel, limiter_array
from .mesh import AlphaField, BoundaryTreatment, ConfigurationError, GridSpec, pad
from .stability import cfl_ratio

__all__ = [
    "SchemeConfig",
    "StepReport",
    "CflViolation",
    "NonFiniteStateError",
    "SweepNonConvergence",
    "fode_backward_euler",
    "explicit1_step",
    "muscl_step",
    "implicit_step",
    "step",
    "solve_scalar_monotone",
]

SCHEMES = ("explicit1", "muscl", "implicit")


class CflViolation(RuntimeError):
    pass


class NonFiniteStateError(FloatingPointError):
    pass


class SweepNonConvergence(RuntimeError):
    def __init__(self, msg, residual):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str
    grid: GridSpec
    dt: float
    flux: FluxModel
    alpha: AlphaField = field(default_factory=lambda: AlphaField.constant(1.0))
    bc: BoundaryTreatment = field(default_factory=BoundaryTreatment)
    limiter: str = "minmod"
    sweep_tol: float | None = None  # None: 1e-12 * (1 + |b|_inf)
    sweep_max: int = 100
    strict_cfl: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if self.sweep_tol is not None and not self.sweep_tol > 0:
            raise ConfigurationError("sweep_tol must be positive")
        if self.sweep_max < 1:
            raise ConfigurationError("sweep_max must be >= 1")
        if self.limiter not in ("minmod", "van_leer"):
            raise ConfigurationError(f"unknown limiter {self.limiter!r}")


@dataclass
class StepReport:
    level: int
    dt_used: float
    sweeps_used: int = 0
    max_principle_ok: bool = True
    cfl_ratio: float = 0.0
    residual: float = 0.0


def _level_coefficients(history: HistoryBuffer, cfg: SchemeConfig):
    """Weights, memory sum b and delta for the level being computed."""
    level = len(history)
    h = cfg.grid.h
    if cfg.alpha.is_constant:
        alpha = cfg.alpha.value
        w = caputo_weights(alpha, level)
        return alpha, memory_term(history, w), step_scale(alpha, cfg.dt) / h
    # alpha frozen per cell at (x_j, t^{n+1})
    alpha = cfg.alpha(cfg.grid.x, level * cfg.dt)
    w = weight_table(alpha, level)
    return alpha, memory_term(history, w), step_scale(alpha, cfg.dt) / h


def _report(history, cfg, new, cfl, sweeps=0, residual=0.0) -> StepReport:
    if not np.all(np.isfinite(new)):
        raise NonFiniteStateError(f"non-finite values at level {len(history)}")
    u0 = history[0]
    lo, hi = u0.min(), u0.max()
    slack = 1e-12 * (1.0 + max(abs(lo), abs(hi)))
    ok = bool(new.min() >= lo - slack and new.max() <= hi + slack)
    return StepReport(len(history), cfg.dt, sweeps, ok, cfl, residual)


def _check_cfl(history, cfg, alpha, order_factor):
    u = history.latest
    speed = cfg.flux.speed_sum(float(u.min()), float(u.max()))
    ratio = cfl_ratio(alpha, cfg.dt, cfg.grid.h, speed, order_factor)
    if cfg.strict_cfl and ratio > 1.0 + 1e-12:
        raise CflViolation(
            f"dt={cfg.dt} violates the CFL bound by a factor {ratio:.6g} at level {len(history)}"
        )
    return ratio


def fode_backward_euler(alpha: float, lam, u0, dt: float, steps: int) -> np.ndarray:
    """Solve D^alpha U^{n+1} = lam * U^{n+1}; returns U^0..U^steps.

    Each step is (1 - z) U^{n+1} = sum_k c_k U^k with
    z = lam * Gamma(2-alpha) * dt**alpha.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    z = lam * step_scale(alpha, dt)
    denom = 1.0 - z
    if denom == 0:
        raise ConfigurationError("1 - lam*Gamma(2-alpha)*dt^alpha vanishes")
    dtype = complex if isinstance(lam, complex) or isinstance(u0, complex) else float
    u = np.empty(steps + 1, dtype=dtype)
    u[0] = u0
    for n in range(steps):
        w = caputo_weights(alpha, n + 1).weights
        u[n + 1] = (w @ u[: n + 1]) / denom
    return u


def explicit1_step(history: HistoryBuffer, cfg: SchemeConfig):
    alpha, b, delta = _level_coefficients(history, cfg)
    ratio = _check_cfl(history, cfg, alpha, 1)
    up = pad(history.latest, cfg.bc, 1)
    fp = cfg.flux.f_plus(up)
    fm = cfg.flux.f_minus(up)
    dflux = (fp[1:-1] - fp[:-2]) + (fm[2:] - fm[1:-1])
    new = b - delta * dflux
    return new, _report(history, cfg, new, ratio)


def _limited_slopes(f: np.ndarray, kind: str) -> np.ndarray:
    """h * s_i = (f_i - f_{i-1}) * phi(theta_i) for i = 1..len(f)-2.

    A flat backward difference gives theta = 0, hence a zero slope.
    """
    back = f[1:-1] - f[:-2]
    fwd = f[2:] - f[1:-1]
    theta = np.divide(fwd, back, out=np.zeros_like(back), where=back != 0)
    return back * limiter_array(kind, theta)


def muscl_step(history: HistoryBuffer, cfg: SchemeConfig):
    alpha, b, delta = _level_coefficients(history, cfg)
    ratio = _check_cfl(history, cfg, alpha, 2)
    up = pad(history.latest, cfg.bc, 2)
    fp = cfg.flux.f_plus(up)
    fm = cfg.flux.f_minus(up)
    # slopes on padded cells 1..N+2, i.e. interior cells -1..N
    sp = _limited_slopes(fp, cfg.limiter)
    sm = _limited_slopes(fm, cfg.limiter)
    fp_c = fp[1:-1]
    fm_c = fm[1:-1]
    # f+ at x_{i+1/2}- from cell i; f- at x_{i+1/2}+ from cell i+1
    plus_face = fp_c + 0.5 * sp          # faces i+1/2, i = -1..N
    minus_face = fm_c[1:] - 0.5 * sm[1:]  # faces i+1/2, i = -1..N-1
    dplus = plus_face[1:-1] - plus_face[:-2]
    dminus = minus_face[1:] - minus_face[:-1]
    new = b - delta * (dplus + dminus)
    return new, _report(history, cfg, new, ratio)


def solve_scalar_monotone(g, dg, rhs: float, guess: float, tol: float = 1e-13) -> float:
    """Root of g(u) = rhs for g increasing with g' >= 1.

    Newton steps safeguarded by bisection.  Because g' >= 1 the root lies
    within |g(guess) - rhs| of ``guess``, which gives the initial bracket.
    """
    u = guess
    r = g(u) - rhs
    if abs(r) <= tol * (1.0 + abs(u)):
        return u
    lo, hi = (u - r, u) if r > 0 else (u, u - r)
    for _ in range(200):
        d = dg(u) if dg is not None else 0.0
        un = u - r / d if d > 0 else 0.5 * (lo + hi)
        if not lo < un < hi:
            un = 0.5 * (lo + hi)
        u = un
        r = g(u) - rhs
        if abs(r) <= tol * (1.0 + abs(u)) or hi - lo <= 4e-16 * (1.0 + abs(u)):
            return u
        if r > 0:
            hi = u
        else:
            lo = u
    return u


def _implicit_residual(u, b, delta, flux: FluxModel, bc: BoundaryTreatment) -> np.ndarray:
    up = pad(u, bc, 1)
    fp = flux.f_plus(up)
    fm = flux.f_minus(up)
    return u + delta * ((fp[1:-1] - fp[:-2]) + (fm[2:] - fm[1:-1])) - b


def _newton_correction(u, r, delta, flux: FluxModel, bc: BoundaryTreatment) -> np.ndarray:
    """Solve J d = r with J the (cyclic) tridiagonal Jacobian of the implicit residual."""
    n = u.size
    delta = np.broadcast_to(delta, u.shape)
    dp = np.array([flux.df_plus(v) for v in u], dtype=float)
    dm = np.array([flux.df_minus(v) for v in u], dtype=float)
    diag = 1.0 + delta * (dp - dm)
    lower = -delta[1:] * dp[:-1]
    upper = delta[:-1] * dm[1:]
    rows = [np.arange(n), np.arange(1, n), np.arange(n - 1)]
    cols = [np.arange(n), np.arange(n - 1), np.arange(1, n)]
    vals = [diag, lower, upper]
    if bc.kind == "periodic":
        rows += [np.array([0]), np.array([n - 1])]
        cols += [np.array([n - 1]), np.array([0])]
        vals += [np.array([-delta[0] * dp[-1]]), np.array([delta[-1] * dm[0]])]
    elif bc.kind == "outflow":
        # ghost equals the boundary cell, so its own flux difference drops out
        diag[0] -= delta[0] * dp[0]
        diag[-1] += delta[-1] * dm[-1]
    jac = csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                     shape=(n, n))
    return spsolve(jac, r)


def implicit_step(history: HistoryBuffer, cfg: SchemeConfig):
    """Implicit upwind step by alternating nonlinear Gauss-Seidel sweeps.

    Each cell equation g(U_j) = U_j + delta*(f+(U_j) - f-(U_j)) = rhs_j has
    g' >= 1 given its neighbours; sweeps alternate left-to-right and
    right-to-left until an iterate stops moving or the residual vanishes.
    For single-signed speeds one sweep in the upwind direction is exact.
    When sweeps stall (two-way coupling at large delta) a global Newton
    correction is tried after each sweep and kept only if it lowers the
    residual; each such correction counts as one iteration.
    """
    alpha, b, delta = _level_coefficients(history, cfg)
    n_cells = b.size
    flux = cfg.flux
    bc = cfg.bc
    fp, fm = flux.f_plus, flux.f_minus
    dfp, dfm = flux.df_plus, flux.df_minus
    newton = dfp is not None and dfm is not None

    tol = cfg.sweep_tol
    if tol is None:
        tol = 1e-12 * (1.0 + float(np.max(np.abs(b))))

    u = history.latest.astype(float).tolist()
    bl = b.tolist()
    dl = np.broadcast_to(delta, b.shape).tolist()
    periodic = bc.kind == "periodic"
    dirichlet = bc.kind == "dirichlet_from_initial"
    outflow = bc.kind == "outflow"
    last = n_cells - 1

    def relax(j):
        dj = dl[j]
        # outflow ghosts equal the cell itself, so that flux difference drops out
        use_left = not (outflow and j == 0)
        use_right = not (outflow and j == last)
        if j > 0:
            left = u[j - 1]
        else:
            left = u[last] if periodic else bc.frozen[0]
        if j < last:
            right = u[j + 1]
        else:
            right = u[0] if periodic else bc.frozen[1]
        rhs = bl[j]
        if use_left:
            rhs += dj * fp(left)
        if use_right:
            rhs -= dj * fm(right)

        if use_left and use_right:
            def g(v):
                return v + dj * (fp(v) - fm(v))
            dg = (lambda v: 1.0 + dj * (dfp(v) - dfm(v))) if newton else None
        elif use_left:
            def g(v):
                return v + dj * fp(v)
            dg = (lambda v: 1.0 + dj * dfp(v)) if newton else None
        elif use_right:
            def g(v):
                return v - dj * fm(v)
            dg = (lambda v: 1.0 - dj * dfm(v)) if newton else None
        else:
            return rhs
        return solve_scalar_monotone(g, dg, rhs, u[j])

    forward = range(n_cells)
    backward = range(n_cells - 1, -1, -1)
    sweeps = 0
    passes = 0
    residual = math.inf
    last_change = math.inf
    while sweeps < cfg.sweep_max:
        order = forward if passes % 2 == 0 else backward
        passes += 1
        change = 0.0
        for j in order:
            v = relax(j)
            dv = abs(v - u[j])
            if dv > change:
                change = dv
            u[j] = v
        sweeps += 1
        r = _implicit_residual(np.array(u), b, delta, flux, bc)
        residual = float(np.max(np.abs(r)))
        if change < tol or residual < tol:
            break
        stalled = passes >= 2 and change > 0.25 * last_change
        last_change = change
        if newton and stalled and sweeps < cfg.sweep_max:
            sweeps += 1
            current = np.array(u)
            d = _newton_correction(current, r, delta, flux, bc)
            # backtrack until the max-norm residual drops
            for _ in range(12):
                trial = current - d
                res_trial = float(np.max(np.abs(_implicit_residual(trial, b, delta, flux, bc))))
                if res_trial < residual:
                    break
                d = 0.5 * d
            else:
                continue
            moved = float(np.max(np.abs(d)))
            u = trial.tolist()
            residual = res_trial
            if res_trial < tol or moved < tol:
                break
    else:
        raise SweepNonConvergence(
            f"implicit sweeps did not converge in {cfg.sweep_max} sweeps "
            f"(residual {residual:.3e}) at level {len(history)}",
            residual,
        )
    new = np.array(u)
    return new, _report(history, cfg, new, 0.0, sweeps, residual)


_STEPPERS = {"explicit1": explicit1_step, "muscl": muscl_step, "implicit": implicit_step}


def step(history: HistoryBuffer, cfg: SchemeConfig):
    return _STEPPERS[cfg.scheme](history, cfg)
