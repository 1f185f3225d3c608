"""Finite volume solvers for time-fractional scalar conservation laws."""

from .caputo import (
    CaputoWeights,
    HistoryBuffer,
    caputo_apply,
    caputo_memory_term,
    caputo_weights,
    memory_term,
    step_scale,
    tilde_c,
    weight_table,
)
from .config import PRESETS, RunConfig, expand_preset, load_config
from .diagnostics import (
    DiagnosticsRecord,
    EnergyLedgerError,
    convergence_slope,
    discrete_entropy,
    energy_decomposition,
    grid_l1_error,
    l1_distance,
    total_variation,
)
from .flux import FluxModel, burgers, limiter, linear_advection
from .harness import RunReport, SweepReport, run, sweep
from .mesh import AlphaField, BoundaryTreatment, ConfigurationError, GridSpec
from .runner import Simulation, simulate
from .schemes import (
    CflViolation,
    NonFiniteStateError,
    SchemeConfig,
    StepReport,
    SweepNonConvergence,
    explicit1_step,
    fode_backward_euler,
    implicit_step,
    muscl_step,
    step,
)
from .specialfn import (
    MittagLefflerConvergenceError,
    MittagLefflerParams,
    fode_exact_solution,
    mittag_leffler,
)
from .stability import boundary_locus, cfl_max_dt, cfl_ratio, hausdorff_distance, stability_roots

__version__ = "0.1.0"
