import math

import numpy as np
import pytest
from scipy.optimize import root

from fraccons.caputo import HistoryBuffer, caputo_weights
from fraccons.diagnostics import energy_decomposition, l1_distance, total_variation
from fraccons.flux import FluxModel, burgers, linear_advection
from fraccons.mesh import AlphaField, BoundaryTreatment, GridSpec
from fraccons.runner import simulate
from fraccons.schemes import (
    CflViolation,
    NonFiniteStateError,
    SchemeConfig,
    SweepNonConvergence,
    fode_backward_euler,
    implicit_step,
    solve_scalar_monotone,
    step,
)
from fraccons.specialfn import mittag_leffler
from fraccons.stability import cfl_max_dt

PERIODIC = BoundaryTreatment("periodic")
OUTFLOW = BoundaryTreatment("outflow")


def config(scheme, dt, flux, alpha=1.0, h=0.05, bc=OUTFLOW, span=(-1.0, 1.0), **kw):
    grid = GridSpec.from_spacing(*span, h, periodic=bc.kind == "periodic")
    return SchemeConfig(scheme, grid, dt, flux, AlphaField.constant(alpha), bc, **kw)


def riemann(x):
    return np.where(x < 0, 2.0, 1.0)


# fractional ODE -------------------------------------------------------------

def test_fode_zero_rate():
    np.testing.assert_array_equal(fode_backward_euler(0.4, 0.0, 2.0, 0.1, 10), 2.0)


def test_fode_alpha_one_step():
    u = fode_backward_euler(1.0, -1.0, 1.0, 0.1, 1)
    assert u[1] == pytest.approx(1 / 1.1, rel=1e-15)


def test_fode_against_mittag_leffler():
    u = fode_backward_euler(0.5, -1.0, 1.0, 0.01, 100)
    # first-order global error at this step, from the observed convergence fit
    assert abs(u[-1] - mittag_leffler(0.5, -1.0)) < 2e-3


def test_fode_complex_rate():
    u = fode_backward_euler(1.0, 1j, 1.0, 0.5, 1)
    assert u[1] == pytest.approx(1 / (1 - 0.5j))


# reductions and exact cases --------------------------------------------------

@pytest.mark.parametrize("scheme", ["explicit1", "muscl", "implicit"])
@pytest.mark.parametrize("bc", [OUTFLOW, PERIODIC])
def test_constant_state_unchanged(scheme, bc):
    cfg = config(scheme, 0.01, burgers(), alpha=0.6, bc=bc)
    sim = simulate(cfg, np.full(cfg.grid.cells, 0.7), 5)
    np.testing.assert_allclose(sim.history.values, 0.7, rtol=1e-14)
    if scheme == "implicit":
        assert sim.max_sweeps == 1


def test_unit_cfl_shift():
    cfg = config("explicit1", 0.05, linear_advection(1.0), h=0.05, bc=PERIODIC)
    u0 = np.random.default_rng(0).normal(size=cfg.grid.cells)
    sim = simulate(cfg, u0, 3)
    np.testing.assert_allclose(sim.final, np.roll(u0, 3), rtol=1e-14)


def test_riemann_advection_bounded_tvd():
    cfg = config("explicit1", 0.005, linear_advection(1.0), alpha=0.9, h=0.01, span=(-2.0, 2.0))
    sim = simulate(cfg, riemann(cfg.grid.x), 40)
    assert np.max(np.abs(sim.history.values)) <= 2.0
    np.testing.assert_allclose(sim.tv_series(), 1.0, atol=1e-14)


def test_muscl_linear_data_is_unlimited_second_order():
    cfg = config("muscl", 0.001, linear_advection(1.0), alpha=0.5, h=0.1, span=(0.0, 1.0))
    u0 = 3.0 + 2.0 * cfg.grid.x
    new, _ = step(HistoryBuffer(u0, cfg.dt), cfg)
    delta = math.gamma(1.5) * math.sqrt(0.001) / 0.1
    # face value u_j + (u_j - u_{j-1})/2, so every interior difference is one grid jump
    u = u0
    face = u[1:] + 0.5 * (u[1:] - u[:-1])
    expected = u[2:] - delta * (face[1:] - face[:-1])
    np.testing.assert_allclose(new[2:-2], expected[:-2], rtol=1e-14)
    np.testing.assert_allclose(new[2:-2], u0[2:-2] - delta * 0.2, rtol=1e-14)


def test_implicit_one_sweep_for_positive_speed():
    cfg = config("implicit", 0.05, linear_advection(1.0), alpha=0.5, h=0.02)
    u0 = riemann(cfg.grid.x)
    new, rep = implicit_step(HistoryBuffer(u0, cfg.dt), cfg)
    assert rep.sweeps_used == 1
    lam = math.gamma(1.5) * math.sqrt(0.05) / 0.02
    n = u0.size
    A = np.eye(n) * (1 + lam) - lam * np.eye(n, k=-1)
    A[0, 0] = 1.0
    np.testing.assert_allclose(new, np.linalg.solve(A, u0), rtol=1e-13)


def test_implicit_large_step_low_alpha():
    cfg = config("implicit", 0.08, linear_advection(1.0), alpha=0.2, h=0.01, span=(-2.0, 2.0))
    sim = simulate(cfg, riemann(cfg.grid.x), 3)
    assert np.all(sim.tv_series() <= 1.0 + 1e-12)


# alpha = 1 against classical schemes written out independently ---------------

def classical_upwind(u, nu, steps):
    for _ in range(steps):
        g = np.concatenate([[u[0]], u])
        u = u - nu * (g[1:] - g[:-1])
    return u


def eo_flux(ul, ur):
    return 0.5 * np.maximum(ul, 0) ** 2 + 0.5 * np.minimum(ur, 0) ** 2


def classical_burgers_upwind(u, nu, steps):
    for _ in range(steps):
        g = np.concatenate([u[-1:], u, u[:1]])
        F = eo_flux(g[:-1], g[1:])
        u = u - nu * (F[1:] - F[:-1])
    return u


def mm(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def vl(a, b):
    return np.where(a * b > 0, 2 * a * b / np.where(a + b == 0, 1, a + b), 0.0)


def classical_muscl(u, nu, steps, slope):
    for _ in range(steps):
        g = np.concatenate([[u[0], u[0]], u, [u[-1], u[-1]]])
        s = slope(g[1:-1] - g[:-2], g[2:] - g[1:-1])
        face = g[1:-1] + 0.5 * s
        u = u - nu * (face[1:-1] - face[:-2])
    return u


def classical_implicit_burgers(u, nu, steps):
    for _ in range(steps):
        prev = u

        def resid(v):
            g = np.concatenate([v[-1:], v, v[:1]])
            F = eo_flux(g[:-1], g[1:])
            return v + nu * (F[1:] - F[:-1]) - prev

        u = root(resid, prev, method="hybr", tol=1e-15).x
    return u


def test_alpha_one_explicit_upwind():
    cfg = config("explicit1", 0.02, linear_advection(1.0), h=0.05)
    u0 = np.sin(3 * cfg.grid.x) + riemann(cfg.grid.x)
    sim = simulate(cfg, u0, 25)
    np.testing.assert_allclose(sim.final, classical_upwind(u0, 0.4, 25), atol=1e-12)


def test_alpha_one_explicit_burgers():
    cfg = config("explicit1", 0.01, burgers(), h=0.05, bc=PERIODIC)
    u0 = -np.sin(np.pi * cfg.grid.x)
    sim = simulate(cfg, u0, 30)
    np.testing.assert_allclose(sim.final, classical_burgers_upwind(u0, 0.2, 30), atol=1e-12)


@pytest.mark.parametrize("kind,slope", [("minmod", mm), ("van_leer", vl)])
def test_alpha_one_muscl(kind, slope):
    cfg = config("muscl", 0.01, linear_advection(1.0), h=0.05, limiter=kind)
    u0 = np.exp(-10 * cfg.grid.x**2) + riemann(cfg.grid.x)
    sim = simulate(cfg, u0, 25)
    np.testing.assert_allclose(sim.final, classical_muscl(u0, 0.2, 25, slope), atol=1e-12)


def test_alpha_one_implicit_linear():
    cfg = config("implicit", 0.1, linear_advection(1.0), h=0.05)
    u0 = riemann(cfg.grid.x)
    sim = simulate(cfg, u0, 10)
    n = u0.size
    A = np.eye(n) * 3.0 - 2.0 * np.eye(n, k=-1)
    A[0, 0] = 1.0
    u = u0
    for _ in range(10):
        u = np.linalg.solve(A, u)
    np.testing.assert_allclose(sim.final, u, atol=1e-12)


def test_alpha_one_implicit_burgers():
    cfg = config("implicit", 0.02, burgers(), h=0.05, bc=PERIODIC)
    u0 = -np.sin(np.pi * cfg.grid.x)
    sim = simulate(cfg, u0, 10)
    np.testing.assert_allclose(sim.final, classical_implicit_burgers(u0, 0.4, 10), atol=1e-12)


# stability properties -------------------------------------------------------

def random_pair(rng, n):
    return rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)


def _check_contraction(cfg, u, v, steps):
    """|e^{n+1}| <= sum_k c_k |e^k| <= |e^0| for the l1 difference e of two runs."""
    alpha = cfg.alpha.value
    a = simulate(cfg, u, steps).history.values
    b = simulate(cfg, v, steps).history.values
    e = np.abs(a - b).sum(axis=1)
    scale = 1e-10 * max(1.0, e[0])
    assert np.all(e <= e[0] + scale)
    for n in range(1, steps + 1):
        assert e[n] <= caputo_weights(alpha, n).weights @ e[:n] + scale


@pytest.mark.parametrize("flux", [linear_advection(1.0), linear_advection(-0.7), burgers()],
                         ids=["a=1", "a=-0.7", "burgers"])
def test_l1_contraction_explicit_under_cfl(flux):
    rng = np.random.default_rng(11)
    grid_cfg = config("explicit1", 1.0, flux, bc=PERIODIC)
    for _ in range(50):
        u, v = random_pair(rng, grid_cfg.grid.cells)
        speed = flux.speed_sum(min(u.min(), v.min()), max(u.max(), v.max()))
        dt = 0.95 * cfl_max_dt(0.6, grid_cfg.grid.h, speed).tau_max
        _check_contraction(config("explicit1", dt, flux, alpha=0.6, bc=PERIODIC), u, v, 15)


@pytest.mark.parametrize("flux", [linear_advection(1.0), burgers()], ids=["a=1", "burgers"])
def test_l1_contraction_implicit_any_step(flux):
    rng = np.random.default_rng(12)
    for i in range(50):
        u, v = random_pair(rng, 40)
        dt = [0.01, 0.2, 1.0, 5.0][i % 4]
        _check_contraction(config("implicit", dt, flux, alpha=0.4, bc=PERIODIC), u, v, 10)


def test_max_principle_explicit():
    rng = np.random.default_rng(5)
    for _ in range(20):
        u0 = rng.uniform(-2, 3, 41)
        flux = burgers()
        dt = 0.95 * cfl_max_dt(0.7, 0.05, flux.speed_sum(u0.min(), u0.max())).tau_max
        sim = simulate(config("explicit1", dt, flux, alpha=0.7), u0, 20)
        vals = sim.history.values
        assert vals.min() >= u0.min() - 1e-13 and vals.max() <= u0.max() + 1e-13
        assert all(r.max_principle_ok for r in sim.reports)


@pytest.mark.parametrize("scheme,order", [("explicit1", 1), ("muscl", 2)])
def test_tvd_under_cfl(scheme, order):
    rng = np.random.default_rng(6)
    for _ in range(10):
        u0 = rng.uniform(-1, 1, 40)
        dt = 0.95 * cfl_max_dt(0.8, 0.05, 1.0, order).tau_max
        sim = simulate(config(scheme, dt, linear_advection(1.0), alpha=0.8, bc=PERIODIC), u0, 20)
        assert np.all(sim.tv_series() <= total_variation(u0) + 1e-12)


def test_implicit_l2_and_entropy():
    rng = np.random.default_rng(8)
    cs = np.linspace(-0.8, 0.8, 5)
    for dt in (0.01, 0.3, 2.0):
        u0 = rng.uniform(-1, 1, 40)
        sim = simulate(config("implicit", dt, linear_advection(1.0), alpha=0.5, bc=PERIODIC), u0, 12)
        vals = sim.history.values
        sq = (vals**2).sum(axis=1)
        assert np.all(sq <= sq[0] * (1 + 1e-12))
        for c in cs:
            kr = np.abs(vals - c).sum(axis=1)
            assert np.all(kr <= kr[0] * (1 + 1e-12))


@pytest.mark.parametrize("bc", [PERIODIC, OUTFLOW])
def test_energy_ledger_from_scheme(bc):
    alpha, dt, h = 0.5, 0.02, 0.0625
    cfg = config("implicit", dt, linear_advection(1.0), alpha=alpha, h=h, bc=bc)
    u0 = np.zeros(cfg.grid.cells)
    u0[8] = 1.0
    sim = simulate(cfg, u0, 8)
    lam = math.gamma(2 - alpha) * dt**alpha / h
    ws = [caputo_weights(alpha, k) for k in range(1, 9)]
    ledger = energy_decomposition(sim.history, ws, lam, periodic=bc.kind == "periodic")
    assert all(abs(e.imbalance) <= 1e-9 * e.history_energy for e in ledger)


# variable order and error paths ---------------------------------------------

@pytest.mark.parametrize("scheme", ["explicit1", "muscl", "implicit"])
def test_variable_alpha_path_matches_constant(scheme):
    base = config(scheme, 0.002, linear_advection(1.0), alpha=0.7)
    var = SchemeConfig(scheme, base.grid, base.dt, base.flux,
                       AlphaField.function(lambda x, t: np.full_like(x, 0.7)), base.bc)
    u0 = riemann(base.grid.x)
    np.testing.assert_allclose(simulate(var, u0, 10).final, simulate(base, u0, 10).final,
                               rtol=1e-13, atol=1e-13)


def test_variable_alpha_bounded():
    cfg = config("implicit", 0.01, linear_advection(1.0), span=(-2.0, 2.0), h=0.02)
    cfg = SchemeConfig("implicit", cfg.grid, 0.01, cfg.flux,
                       AlphaField.function(lambda x, t: 1 - 0.9 * np.exp(-30 * x * x)), OUTFLOW)
    x = cfg.grid.x
    u0 = np.where((x >= -1.5) & (x <= -0.5), 0.5 * np.cos(np.pi * (2 * x + 4)) + 0.5, 0.0)
    sim = simulate(cfg, u0, 50)
    assert sim.final.min() >= -1e-13 and sim.final.max() <= 1 + 1e-13
    assert np.all(np.diff(sim.tv_series()) <= 1e-12)


def test_strict_cfl_aborts():
    cfg = config("explicit1", 0.1, linear_advection(1.0), alpha=0.9, strict_cfl=True)
    with pytest.raises(CflViolation):
        simulate(cfg, riemann(cfg.grid.x), 2)


def test_warns_past_cfl(caplog):
    cfg = config("explicit1", 0.06, linear_advection(1.0), alpha=0.9)
    sim = simulate(cfg, riemann(cfg.grid.x), 3)
    assert sim.cfl_warned and sim.max_cfl_ratio > 1
    assert sum("CFL" in r.message for r in caplog.records) == 1


def test_nonfinite_abort():
    cfg = config("explicit1", 0.2, linear_advection(1.0), alpha=0.9, h=0.01)
    with pytest.raises(NonFiniteStateError):
        simulate(cfg, riemann(cfg.grid.x) + np.sin(50 * cfg.grid.x), 2000)


def test_sweep_non_convergence():
    cfg = config("implicit", 0.01, burgers(), alpha=0.2, h=0.01, bc=PERIODIC, sweep_max=2)
    with pytest.raises(SweepNonConvergence) as info:
        simulate(cfg, -np.sin(np.pi * cfg.grid.x), 5)
    assert info.value.residual > 0


def test_implicit_rough_data_large_step():
    rng = np.random.default_rng(4)
    cfg = config("implicit", 5.0, burgers(), alpha=0.3, bc=PERIODIC)
    u0 = rng.uniform(-1, 1, cfg.grid.cells)
    new, rep = implicit_step(HistoryBuffer(u0, cfg.dt), cfg)
    assert rep.sweeps_used < cfg.sweep_max
    assert rep.residual < 1e-10


def test_implicit_without_derivatives_uses_sweeps_only():
    f = burgers()
    plain = FluxModel("burgers-plain", f.f_plus, f.f_minus, f.dfplus_bound, f.dfminus_bound)
    cfg = config("implicit", 0.01, f, alpha=0.5, bc=PERIODIC)
    cfg_plain = config("implicit", 0.01, plain, alpha=0.5, bc=PERIODIC)
    u0 = -np.sin(np.pi * cfg.grid.x)
    np.testing.assert_allclose(simulate(cfg_plain, u0, 5).final, simulate(cfg, u0, 5).final,
                               atol=1e-11)


def test_dirichlet_holds_boundary():
    cfg = config("explicit1", 0.01, linear_advection(1.0), alpha=0.8)
    u0 = riemann(cfg.grid.x)
    cfg = SchemeConfig("explicit1", cfg.grid, 0.01, cfg.flux, cfg.alpha, BoundaryTreatment.dirichlet(u0))
    sim = simulate(cfg, u0, 30)
    assert sim.final[0] == 2.0


def test_scalar_solver():
    u = solve_scalar_monotone(lambda v: v + v**3, lambda v: 1 + 3 * v * v, 10.0, 0.0)
    assert u == pytest.approx(2.0, rel=1e-13)
    u = solve_scalar_monotone(lambda v: v + max(v, 0) ** 2, None, 2.0, -5.0)
    assert u == pytest.approx(1.0, rel=1e-12)
