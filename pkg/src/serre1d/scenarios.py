"""Closed-form solutions and initial/boundary data for the standard experiments.

Four tagged scenarios are available: ``soliton``, ``dam_break``,
``rectangular_wave`` and ``undular_bore``. A ``custom`` scenario takes a
user callable and is only reachable from Python.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .flux import GRAVITY
from .grid import (
    DEPTH,
    MOMENTUM,
    BoundarySpec,
    Grid,
    SolutionBoundary,
    fill_ghost_values,
    function_to_averages,
    make_grid,
)

SCENARIOS = ("soliton", "dam_break", "rectangular_wave", "undular_bore", "custom")

# Undular-bore flume: inflow depth and velocity, depth held at the closed gate.
BORE_H_UP = 0.192
BORE_U_UP = 0.199
BORE_H_DOWN = 0.22
BORE_LENGTH = 11.15
BORE_DX = 0.01115
# Upstream speed of the front is about h_up u_up / (h_down - h_up) = 1.36 m/s,
# so it reaches the inflow after ~8 s. Stop before it gets there.
BORE_T_END = 7.0

# Inflow value 0.199 is read as a velocity: Fr ~ 0.145 matches the stated
# steady subcritical flow, whereas a discharge would make it supercritical.
BORE_VELOCITY_FLAG = "undular_bore.u_up interpreted as m/s (depth-averaged velocity), not m^3/s"

DEFAULTS = {
    "soliton": {"x0": 0.0, "boundary": "exact"},
    "dam_break": {},
    "rectangular_wave": {},
    "undular_bore": {
        "h_up": BORE_H_UP,
        "u_up": BORE_U_UP,
        "h_down": BORE_H_DOWN,
        "u_down": 0.0,
    },
    "custom": {},
}
REQUIRED = {
    "soliton": ("a0", "a1"),
    "dam_break": ("h1", "h0"),
    "rectangular_wave": ("h1", "drop", "b"),
    "undular_bore": (),
    "custom": ("left_h", "left_u", "right_h", "right_u"),
}
OPTIONAL = {
    "soliton": ("x0", "boundary"),
    "dam_break": ("x_dam",),
    "rectangular_wave": (),
    "undular_bore": ("h_up", "u_up", "h_down", "u_down"),
    "custom": (),
}
SOLITON_BOUNDARIES = ("exact", "still")


class ScenarioError(ValueError):
    """A scenario is misconfigured."""


@dataclass(frozen=True)
class SolitonParams:
    """Solitary wave of amplitude ``a1`` on still water of depth ``a0``."""

    a0: float
    a1: float
    g: float = GRAVITY
    x0: float = 0.0

    def __post_init__(self):
        if not (self.a0 > 0 and self.a1 > 0):
            raise ScenarioError("soliton needs a0 > 0 and a1 > 0")
        if not self.g > 0:
            raise ScenarioError("gravity must be positive")

    @property
    def c(self) -> float:
        """Celerity ``sqrt(g (a0 + a1))``."""
        return math.sqrt(self.g * (self.a0 + self.a1))

    @property
    def kappa(self) -> float:
        """Decay rate ``sqrt(3 a1) / (2 a0 sqrt(a0 + a1))``."""
        return math.sqrt(3.0 * self.a1) / (2.0 * self.a0 * math.sqrt(self.a0 + self.a1))


def soliton_fields(params: SolitonParams, x, t: float):
    """``(h, u, G, u_x)`` of the solitary wave at points ``x`` and time ``t``.

    ``G = u h - h^2 h_x u_x - h^3 u_xx / 3`` with all derivatives in closed
    form from ``h = a0 + a1 sech^2(k (x - x0 - c t))`` and ``u = c (1 - a0 / h)``.
    """
    a0, a1, c, k = params.a0, params.a1, params.c, params.kappa
    xi = k * (np.asarray(x, dtype=float) - params.x0 - c * t)
    sech2 = 1.0 / np.cosh(xi) ** 2
    tanh = np.tanh(xi)
    h = a0 + a1 * sech2
    h_x = -2.0 * a1 * k * sech2 * tanh
    h_xx = 2.0 * a1 * k * k * sech2 * (2.0 * tanh * tanh - sech2)
    u = c * (1.0 - a0 / h)
    u_x = c * a0 * h_x / h**2
    u_xx = c * a0 * (h_xx / h**2 - 2.0 * h_x**2 / h**3)
    G = u * h - h * h * h_x * u_x - h**3 * u_xx / 3.0
    return h, u, G, u_x


def soliton_state(params: SolitonParams, x, t: float):
    """Depth, velocity and G of the solitary wave."""
    h, u, G, _ = soliton_fields(params, x, t)
    return h, u, G


def soliton_boundary(params: SolitonParams) -> SolutionBoundary:
    return SolutionBoundary(lambda x, t: soliton_fields(params, x, t))


@dataclass
class InitialState:
    """Ghost-padded initial averages plus how they were built."""

    h: np.ndarray
    G: np.ndarray
    metadata: dict = field(default_factory=dict)


def snap_to_interface(grid: Grid, x: float) -> float:
    """Nearest cell interface, so a step is exactly representable by averages."""
    return grid.nearest_interface(x)


def _step_averages(grid: Grid, edges: list[tuple[float, float]], inside: float, outside: float) -> np.ndarray:
    """Averages of a field equal to ``inside`` on the given intervals, ``outside`` elsewhere.

    Interval ends must be cell interfaces; ghost cells take the outside value.
    """
    x = grid.padded_centers
    h = np.full(x.size, float(outside))
    for a, b in edges:
        h[(x > a) & (x < b)] = inside
    return h


def dam_break_ic(h1: float, h0: float, x_dam: float, grid: Grid) -> InitialState:
    """Depth ``h1`` left of the dam and ``h0`` right of it, fluid at rest.

    ``x_dam`` is moved to the nearest cell interface; the snapped position
    is recorded in the metadata.
    """
    if not (h1 > 0 and h0 > 0):
        raise ScenarioError("dam-break depths must be positive")
    snapped = snap_to_interface(grid, x_dam)
    x = grid.padded_centers
    h = np.where(x < snapped, float(h1), float(h0))
    return InitialState(
        h=h,
        G=np.zeros_like(h),
        metadata={"x_dam": float(x_dam), "x_dam_snapped": snapped},
    )


def rectangular_wave_ic(h1: float, drop: float, b: float, grid: Grid) -> InitialState:
    """Still water of depth ``h1`` lowered by ``drop`` over ``|x| < b``.

    ``-b`` and ``b`` are snapped to the nearest interfaces independently.
    """
    if not h1 > drop:
        raise ScenarioError("the depression must leave positive depth (h1 > drop)")
    if drop < 0 or b < 0:
        raise ScenarioError("drop and b must be non-negative")
    left = snap_to_interface(grid, -b)
    right = snap_to_interface(grid, b)
    h = _step_averages(grid, [(left, right)], h1 - drop, h1)
    return InitialState(
        h=h,
        G=np.zeros_like(h),
        metadata={"b": float(b), "b_snapped": (left, right)},
    )


@dataclass(frozen=True)
class StokerSolution:
    """Shallow-water dam break: rarefaction, constant middle state, shock."""

    h1: float
    h0: float
    g: float
    x_dam: float
    h_m: float
    u_m: float
    shock_speed: float

    @property
    def head_speed(self) -> float:
        """Leading edge of the rarefaction, ``-sqrt(g h1)``."""
        return -math.sqrt(self.g * self.h1)

    @property
    def tail_speed(self) -> float:
        """Trailing edge of the rarefaction, ``u_m - sqrt(g h_m)``."""
        return self.u_m - math.sqrt(self.g * self.h_m)

    def profile(self, x, t: float):
        """``(h, u)`` at points ``x`` and time ``t > 0``."""
        if not t > 0:
            raise ScenarioError("the similarity solution needs t > 0")
        x = np.asarray(x, dtype=float)
        s = (x - self.x_dam) / t
        c1 = math.sqrt(self.g * self.h1)
        h = np.full(x.shape, float(self.h0))
        u = np.zeros(x.shape)
        upstream = s <= self.head_speed
        fan = (s > self.head_speed) & (s <= self.tail_speed)
        middle = (s > self.tail_speed) & (s < self.shock_speed)
        h[upstream] = self.h1
        h[fan] = (2.0 * c1 - s[fan]) ** 2 / (9.0 * self.g)
        u[fan] = 2.0 / 3.0 * (c1 + s[fan])
        h[middle] = self.h_m
        u[middle] = self.u_m
        return h, u


def stoker_middle_state(h1: float, h0: float, g: float = GRAVITY, xtol: float = 1e-14):
    """``(h_m, u_m, S)`` joining the rarefaction from ``h1`` to the shock into ``h0``.

    Solves ``2 (sqrt(g h1) - sqrt(g h_m)) = (h_m - h0) sqrt(g/2 (1/h_m + 1/h0))``
    on ``(h0, h1)``.
    """
    if not h1 > h0 > 0:
        raise ScenarioError("dam break needs h1 > h0 > 0")
    c1 = math.sqrt(g * h1)

    def mismatch(hm):
        return 2.0 * (c1 - math.sqrt(g * hm)) - (hm - h0) * math.sqrt(0.5 * g * (1.0 / hm + 1.0 / h0))

    h_m, info = brentq(mismatch, h0, h1, xtol=xtol, rtol=4 * np.finfo(float).eps, full_output=True)
    if not info.converged:
        raise ScenarioError(f"middle-state root solve did not converge: {info.flag}")
    u_m = 2.0 * (c1 - math.sqrt(g * h_m))
    return h_m, u_m, u_m * h_m / (h_m - h0)


def sww_dam_break_exact(h1: float, h0: float, g: float, x_dam: float, t: float, x=None):
    """Shallow-water dam-break reference.

    Returns a :class:`StokerSolution`, or its ``(h, u)`` profile when ``x``
    is given. Equal depths give the uniform state at rest.
    """
    if h1 == h0:
        if x is None:
            return StokerSolution(h1, h0, g, x_dam, h1, 0.0, 0.0)
        x = np.asarray(x, dtype=float)
        return np.full(x.shape, float(h1)), np.zeros(x.shape)
    h_m, u_m, speed = stoker_middle_state(h1, h0, g)
    solution = StokerSolution(h1, h0, g, x_dam, h_m, u_m, speed)
    return solution if x is None else solution.profile(x, t)


@dataclass
class ScenarioConfig:
    """Everything needed to run one simulation.

    ``params`` holds the scenario-specific keys; missing optional ones are
    filled from :data:`DEFAULTS`. ``initial`` is used only by ``custom`` and
    maps a grid to ghost-padded ``(h, G)`` averages.
    """

    scenario: str
    x_min: float
    x_max: float
    n_cells: int
    cr: float
    t_end: float
    g: float = GRAVITY
    output_times: tuple[float, ...] = ()
    params: dict = field(default_factory=dict)
    max_steps: int = 10_000_000
    initial: Callable[[Grid], tuple[np.ndarray, np.ndarray]] | None = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ScenarioError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        self.output_times = tuple(float(t) for t in self.output_times)
        self.params = {**DEFAULTS[self.scenario], **self.params}
        allowed = set(REQUIRED[self.scenario]) | set(OPTIONAL[self.scenario])
        unknown = sorted(set(self.params) - allowed)
        if unknown:
            raise ScenarioError(f"unknown parameter(s) for {self.scenario}: {', '.join(unknown)}")
        missing = [k for k in REQUIRED[self.scenario] if k not in self.params]
        if missing:
            raise ScenarioError(f"missing parameter(s) for {self.scenario}: {', '.join(missing)}")
        if not 0.0 < self.cr <= 1.0:
            raise ScenarioError(f"cr must lie in (0, 1], got {self.cr}")
        if self.t_end < 0:
            raise ScenarioError("t_end must be non-negative")
        if not self.g > 0:
            raise ScenarioError("g must be positive")
        if self.scenario == "soliton" and self.params["boundary"] not in SOLITON_BOUNDARIES:
            raise ScenarioError(f"soliton boundary must be one of {SOLITON_BOUNDARIES}")
        if self.scenario == "custom" and self.initial is None:
            raise ScenarioError("the custom scenario needs an initial-state callable")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells


@dataclass
class Scenario:
    """A built configuration: grid, boundary data and initial averages."""

    config: ScenarioConfig
    grid: Grid
    bc: BoundarySpec
    initial: InitialState
    solution: SolutionBoundary | None = None
    interpretation: tuple[str, ...] = ()


def undular_bore_config(t_end: float = BORE_T_END, cr: float = 0.2, **overrides) -> ScenarioConfig:
    """Flume with steady inflow and a gate closed at the downstream end.

    The domain starts at the gate closure: uniform inflow everywhere, with
    the downstream boundary already held at the gate depth and at rest.
    """
    n_cells = int(round(BORE_LENGTH / BORE_DX))
    settings = dict(
        scenario="undular_bore",
        x_min=0.0,
        x_max=BORE_LENGTH,
        n_cells=n_cells,
        cr=cr,
        t_end=t_end,
    )
    settings.update(overrides)
    return ScenarioConfig(**settings)


def _soliton(config: ScenarioConfig, grid: Grid) -> Scenario:
    p = config.params
    params = SolitonParams(p["a0"], p["a1"], config.g, p["x0"])
    f = lambda t: (lambda x: soliton_fields(params, x, t))  # noqa: E731
    h = function_to_averages(lambda x: f(0.0)(x)[0], grid, DEPTH).values
    G = function_to_averages(lambda x: f(0.0)(x)[2], grid, MOMENTUM).values
    if p["boundary"] == "exact":
        solution = soliton_boundary(params)
        bc = solution.spec(grid, 0.0)
    else:
        solution = None
        bc = BoundarySpec(params.a0, 0.0, params.a0, 0.0)
        fill_ghost_values(h, params.a0, params.a0)
        fill_ghost_values(G, 0.0, 0.0)
    meta = {"celerity": params.c, "kappa": params.kappa, "boundary": p["boundary"]}
    return Scenario(config, grid, bc, InitialState(h, G, meta), solution)


def _dam_break(config: ScenarioConfig, grid: Grid) -> Scenario:
    p = config.params
    x_dam = p.get("x_dam", 0.5 * (config.x_min + config.x_max))
    state = dam_break_ic(p["h1"], p["h0"], x_dam, grid)
    return Scenario(config, grid, BoundarySpec(p["h1"], 0.0, p["h0"], 0.0), state)


def _rectangular_wave(config: ScenarioConfig, grid: Grid) -> Scenario:
    p = config.params
    if not (config.x_min < -p["b"] and p["b"] < config.x_max):
        raise ScenarioError("the depression |x| < b must lie inside the domain")
    state = rectangular_wave_ic(p["h1"], p["drop"], p["b"], grid)
    return Scenario(config, grid, BoundarySpec(p["h1"], 0.0, p["h1"], 0.0), state)


def _undular_bore(config: ScenarioConfig, grid: Grid) -> Scenario:
    p = config.params
    h_up, u_up, h_down, u_down = p["h_up"], p["u_up"], p["h_down"], p["u_down"]
    h = np.full(grid.n_padded, float(h_up))
    G = np.full(grid.n_padded, float(h_up * u_up))
    fill_ghost_values(h, h_up, h_down)
    fill_ghost_values(G, h_up * u_up, h_down * u_down)
    froude = u_up / math.sqrt(config.g * h_up)
    state = InitialState(h, G, {"froude_up": froude})
    bc = BoundarySpec(h_up, u_up, h_down, u_down)
    return Scenario(config, grid, bc, state, interpretation=(BORE_VELOCITY_FLAG,))


def _custom(config: ScenarioConfig, grid: Grid) -> Scenario:
    p = config.params
    h, G = config.initial(grid)
    h = np.asarray(h, dtype=float)
    G = np.asarray(G, dtype=float)
    if h.shape != (grid.n_padded,) or G.shape != (grid.n_padded,):
        raise ScenarioError(f"custom initial fields must have length {grid.n_padded}")
    bc = BoundarySpec(p["left_h"], p["left_u"], p["right_h"], p["right_u"])
    return Scenario(config, grid, bc, InitialState(h, G))


_BUILDERS = {
    "soliton": _soliton,
    "dam_break": _dam_break,
    "rectangular_wave": _rectangular_wave,
    "undular_bore": _undular_bore,
    "custom": _custom,
}


def build(config: ScenarioConfig) -> Scenario:
    """Grid, boundary data and initial averages for ``config``."""
    grid = make_grid(config.x_min, config.x_max, config.n_cells)
    scenario = _BUILDERS[config.scenario](config, grid)
    if not np.all(scenario.initial.h[grid.interior] > 0):
        raise ScenarioError("initial depth must be positive everywhere")
    return scenario
