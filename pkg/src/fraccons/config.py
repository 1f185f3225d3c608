"""Run configuration: JSON schema, builders and the preset catalog.

A run config is a flat JSON object::

    {
      "name": "advection-riemann",
      "scheme": "explicit1",            # explicit1 | muscl | implicit
      "limiter": "minmod",              # muscl only: minmod | van_leer
      "flux": {"kind": "linear", "a": 1.0},          # or {"kind": "burgers"}
      "alpha": 0.9,                     # or an alpha-field object, see below
      "initial": {"kind": "riemann", "left": 2.0, "right": 1.0, "x0": 0.0},
      "grid": {"x_left": -2.0, "x_right": 2.0, "h": 0.01, "periodic": false},
      "bc": "outflow",                  # outflow | periodic | dirichlet_from_initial
      "dt": 0.005,
      "T": 0.2,
      "sweep_tol": null, "sweep_max": 100,
      "strict_cfl": false,
      "record_every": null,
      "snapshot_times": [],
      "out": "out"
    }

Alpha fields::

    {"kind": "constant", "value": 0.8}
    {"kind": "memory-pulse", "amplitude": A, "spatial_rate": k, "spatial_power": p,
     "time_rate": c, "t0": t0, "time_power": q, "frozen_time": null}

giving alpha = 1 - A exp(-k |x|^p - c (t - t0)^q); a numeric ``frozen_time``
replaces t in the time term.

Initial data kinds: ``riemann`` (left/right/x0, right state at x >= x0),
``gaussian`` (amplitude, rate, base: base + amplitude exp(-rate x^2)),
``sine`` (amplitude, wavenumber: amplitude sin(wavenumber pi x)),
``cosine-bump`` (0.5 cos(pi(2x + 4)) + 0.5 on [a, b], zero elsewhere).
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .flux import FluxModel, burgers, linear_advection
from .mesh import AlphaField, BoundaryTreatment, ConfigurationError, GridSpec
from .schemes import SchemeConfig

__all__ = [
    "RunConfig",
    "PRESETS",
    "expand_preset",
    "load_config",
    "build_flux",
    "build_alpha",
    "build_initial",
]


@dataclass
class RunConfig:
    name: str = "run"
    scheme: str = "explicit1"
    limiter: str = "minmod"
    flux: dict = field(default_factory=lambda: {"kind": "linear", "a": 1.0})
    alpha: object = 1.0
    initial: dict = field(default_factory=lambda: {"kind": "riemann"})
    grid: dict = field(default_factory=lambda: {"x_left": -2.0, "x_right": 2.0, "h": 0.01})
    bc: str = "outflow"
    dt: float = 0.005
    T: float = 0.2
    sweep_tol: float | None = None
    sweep_max: int = 100
    strict_cfl: bool = False
    record_every: int | None = None
    snapshot_times: list = field(default_factory=list)
    out: str = "out"
    description: str = ""
    experiments: list = field(default_factory=list)

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigurationError("T must be positive")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**copy.deepcopy(data))

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "RunConfig":
        d = self.to_dict()
        d.update(changes)
        return RunConfig.from_dict(d)

    @property
    def steps(self) -> int:
        """Number of steps to reach T; the last step may overshoot T when dt does not divide it."""
        n = self.T / self.dt
        return max(1, math.ceil(n - 1e-9 * max(1.0, n)))

    def grid_spec(self) -> GridSpec:
        g = self.grid
        periodic = bool(g.get("periodic", self.bc == "periodic"))
        if "h" in g:
            return GridSpec.from_spacing(g["x_left"], g["x_right"], g["h"], periodic)
        return GridSpec(float(g["x_left"]), float(g["x_right"]), int(g["cells"]), periodic)

    def initial_data(self) -> np.ndarray:
        return build_initial(self.initial)(self.grid_spec().x)

    def scheme_config(self) -> SchemeConfig:
        grid = self.grid_spec()
        if self.bc == "dirichlet_from_initial":
            bc = BoundaryTreatment.dirichlet(self.initial_data())
        else:
            bc = BoundaryTreatment(self.bc)
        return SchemeConfig(
            scheme=self.scheme,
            grid=grid,
            dt=float(self.dt),
            flux=build_flux(self.flux),
            alpha=build_alpha(self.alpha),
            bc=bc,
            limiter=self.limiter,
            sweep_tol=self.sweep_tol,
            sweep_max=int(self.sweep_max),
            strict_cfl=bool(self.strict_cfl),
        )


def build_flux(spec: dict) -> FluxModel:
    kind = spec.get("kind")
    if kind == "linear":
        return linear_advection(float(spec.get("a", 1.0)))
    if kind == "burgers":
        return burgers()
    raise ConfigurationError(f"unknown flux kind {kind!r}")


def _memory_pulse(amplitude=0.5, spatial_rate=30.0, spatial_power=2.0, time_rate=7000.0,
                  t0=0.5, time_power=12, frozen_time=None):
    def alpha(x, t):
        tt = t if frozen_time is None else frozen_time
        arg = spatial_rate * np.abs(x) ** spatial_power + time_rate * (tt - t0) ** time_power
        return 1.0 - amplitude * np.exp(-arg)

    return alpha


def build_alpha(spec) -> AlphaField:
    if isinstance(spec, (int, float)):
        return AlphaField.constant(float(spec))
    kind = spec.get("kind")
    if kind == "constant":
        return AlphaField.constant(float(spec["value"]))
    if kind == "memory-pulse":
        params = {k: v for k, v in spec.items() if k != "kind"}
        try:
            fn = _memory_pulse(**params)
        except TypeError as exc:
            raise ConfigurationError(f"bad memory-pulse parameters: {exc}") from None
        return AlphaField.function(fn, label=json.dumps(spec, sort_keys=True))
    raise ConfigurationError(f"unknown alpha kind {kind!r}")


def build_initial(spec: dict):
    kind = spec.get("kind")
    if kind == "riemann":
        left, right = float(spec.get("left", 2.0)), float(spec.get("right", 1.0))
        x0 = float(spec.get("x0", 0.0))
        return lambda x: np.where(x < x0, left, right)
    if kind == "gaussian":
        amp, rate = float(spec.get("amplitude", 1.0)), float(spec.get("rate", 10.0))
        base = float(spec.get("base", 1.0))
        return lambda x: amp * np.exp(-rate * x * x) + base
    if kind == "sine":
        amp, k = float(spec.get("amplitude", -1.0)), float(spec.get("wavenumber", 1.0))
        return lambda x: amp * np.sin(k * math.pi * x)
    if kind == "cosine-bump":
        a, b = float(spec.get("a", -1.5)), float(spec.get("b", -0.5))
        return lambda x: np.where((x >= a) & (x <= b), 0.5 * np.cos(math.pi * (2 * x + 4)) + 0.5, 0.0)
    raise ConfigurationError(f"unknown initial-data kind {kind!r}")


_RIEMANN = {"kind": "riemann", "left": 2.0, "right": 1.0, "x0": 0.0}
_GAUSS = {"kind": "gaussian", "amplitude": 1.0, "rate": 10.0, "base": 1.0}
_SINE = {"kind": "sine", "amplitude": -1.0, "wavenumber": 1.0}
_LINEAR = {"kind": "linear", "a": 1.0}
_BURGERS = {"kind": "burgers"}
_WIDE = {"x_left": -2.0, "x_right": 2.0, "h": 0.01}
_CONV = {"x_left": -1.0, "x_right": 1.5, "h": 0.00625}
_PERIODIC = {"x_left": -1.0, "x_right": 1.0, "h": 0.01, "periodic": True}

# Computational domains and boundary handling below are choices, exposed as
# ordinary config keys.
PRESETS: dict[str, dict] = {
    "advection-riemann": dict(
        scheme="explicit1", flux=_LINEAR, alpha=0.9, initial=_RIEMANN, grid=_WIDE,
        dt=0.005, T=0.2, experiments=["stability-explicit"],
        description="First-order explicit upwind, Riemann data, stable step",
    ),
    "advection-riemann-muscl": dict(
        scheme="muscl", flux=_LINEAR, alpha=0.9, initial=_RIEMANN, grid=_WIDE,
        dt=0.002, T=0.2, experiments=["stability-muscl"],
        description="MUSCL (minmod), Riemann data, stable step",
    ),
    "advection-riemann-convergence": dict(
        scheme="explicit1", flux=_LINEAR, alpha=0.9, initial=_RIEMANN, grid=_CONV,
        dt=1e-4, T=0.2, experiments=["convergence-advection"],
        description="First-order scheme, Riemann data; sweep dx for the order",
    ),
    "advection-gaussian": dict(
        scheme="explicit1", flux=_LINEAR, alpha=0.8, initial=_GAUSS, grid=_CONV,
        dt=1e-4, T=0.2, experiments=["convergence-advection"],
        description="First-order scheme on smooth data",
    ),
    "advection-gaussian-muscl": dict(
        scheme="muscl", flux=_LINEAR, alpha=0.9, initial=_GAUSS, grid=_CONV,
        dt=1e-4, T=0.2, experiments=["convergence-advection"],
        description="MUSCL on smooth Gaussian data; sweep dx for second order",
    ),
    "implicit-advection-riemann": dict(
        scheme="implicit", flux=_LINEAR, alpha=0.2, initial=_RIEMANN, grid=_WIDE,
        dt=0.01, T=0.2, experiments=["implicit-stability"],
        description="Implicit upwind at alpha=0.2; sweep dt for stability, dx for order",
    ),
    "burgers-sine": dict(
        scheme="implicit", flux=_BURGERS, alpha=0.5, initial=_SINE, grid=_PERIODIC,
        bc="periodic", dt=0.01, T=0.5, experiments=["burgers-stability"],
        description="Implicit upwind for Burgers with -sin(pi x); try alpha in {0.2,0.5,0.8}",
    ),
    "alpha-family-advection": dict(
        scheme="implicit", flux=_LINEAR, alpha=0.5, initial=_RIEMANN, grid=_WIDE,
        dt=0.01, T=0.2, experiments=["alpha-family"],
        description="Riemann advection at T=0.2; sweep alpha toward 1",
    ),
    "alpha-family-burgers": dict(
        scheme="implicit", flux=_BURGERS, alpha=0.5, initial=_SINE, grid=_PERIODIC,
        bc="periodic", dt=0.01, T=0.2, experiments=["alpha-family"],
        description="Burgers sine at T=0.2; sweep alpha toward 1",
    ),
    "advection-variable-alpha": dict(
        scheme="implicit", flux=_LINEAR,
        alpha={"kind": "memory-pulse", "amplitude": 0.5, "spatial_rate": 30.0,
               "spatial_power": 2.0, "time_rate": 7000.0, "t0": 0.5,
               "time_power": 12, "frozen_time": 0.0},
        initial={"kind": "cosine-bump", "a": -1.5, "b": -0.5},
        grid={"x_left": -2.0, "x_right": 2.0, "h": 0.01},
        dt=0.01, T=1.5, snapshot_times=[1.0, 1.5], experiments=["variable-alpha-advection"],
        description=("Space-varying memory on a cosine bump; amplitude 0.5, 2.4, 5.3 "
                     "give the three memory strengths; frozen_time=null gives the "
                     "time-dependent variant (valid only for amplitude < 1)"),
    ),
    "burgers-variable-alpha": dict(
        scheme="implicit", flux=_BURGERS,
        alpha={"kind": "memory-pulse", "amplitude": 0.9, "spatial_rate": 8.0,
               "spatial_power": 1.0, "time_rate": 7000.0, "t0": 0.8,
               "time_power": 12, "frozen_time": None},
        initial=_SINE, grid=_PERIODIC, bc="periodic", dt=0.01, T=0.5,
        experiments=["variable-alpha-burgers"],
        description="Burgers sine with alpha = 1 - 0.9 exp(-8|x| - 7000 (t-0.8)^12)",
    ),
    "burgers-riemann-nonuniqueness": dict(
        scheme="implicit", flux=_BURGERS, alpha=0.8,
        initial={"kind": "riemann", "left": -1.0, "right": 1.0, "x0": 0.0},
        grid={"x_left": -0.5, "x_right": 0.5, "h": 0.001},
        dt=0.0002, T=0.02, experiments=["nonuniqueness"],
        description="Burgers with -1/+1 data: memory rarefaction vs static shock",
    ),
}


def expand_preset(name: str, **overrides) -> RunConfig:
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    data = copy.deepcopy(PRESETS[name])
    data["name"] = name
    data.update(overrides)
    return RunConfig.from_dict(data)


def load_config(path=None, preset: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Preset first, then keys from the JSON file, then explicit overrides."""
    data: dict = {}
    if preset is not None:
        data = expand_preset(preset).to_dict()
    if path is not None:
        with open(path) as fh:
            file_data = json.load(fh)
        if not isinstance(file_data, dict):
            raise ConfigurationError("config file must hold a JSON object")
        if "preset" in file_data:
            base = file_data.pop("preset")
            if preset is None:
                data = expand_preset(base).to_dict()
        data.update(file_data)
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(data)
