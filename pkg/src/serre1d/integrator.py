"""SSP-RK3 time stepping with velocity recovery before every Euler stage."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .fem import SingularSystemError, solve_velocity
from .flux import GRAVITY, PositivityError, flux_difference, stage_fluxes
from .grid import BoundarySpec, Grid, NodalField, SolutionBoundary, total
from .reconstruction import StageReconstruction, reconstruct_stage
from .scenarios import Scenario, ScenarioConfig, build

log = logging.getLogger(__name__)

# Weight of each stage tendency in the combined update q_n+1 = q_n + dt * sum(w L).
STAGE_WEIGHTS = (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0)


class StepFailure(RuntimeError):
    """A time step could not be completed."""


@dataclass(frozen=True)
class StepControls:
    cr: float
    t_end: float
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not 0.0 < self.cr <= 1.0:
            raise ValueError(f"Courant number must lie in (0, 1], got {self.cr}")
        if self.t_end < 0.0:
            raise ValueError("t_end must be non-negative")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass
class SimulationState:
    """Solution at time ``t`` with its recovered velocity.

    ``q`` holds ghost-padded cell averages, row 0 depth and row 1 G.
    ``boundary_flux`` is the time integral of (left inflow - right outflow)
    for both rows, so ``total(q) - boundary_flux`` is conserved.
    """

    t: float
    q: np.ndarray
    u: NodalField
    steps: int = 0
    boundary_flux: np.ndarray = field(default_factory=lambda: np.zeros(2))
    rec: StageReconstruction | None = field(default=None, repr=False, compare=False)

    @property
    def h(self) -> np.ndarray:
        return self.q[0]

    @property
    def G(self) -> np.ndarray:
        return self.q[1]

    def copy(self) -> "SimulationState":
        return replace(
            self,
            q=self.q.copy(),
            u=NodalField(self.u.integer_nodes.copy(), self.u.half_nodes.copy()),
            boundary_flux=self.boundary_flux.copy(),
        )


def ssp_rk3(q, dt, tendency: Callable):
    """One three-stage SSP Runge-Kutta step for ``dq/dt = tendency(q)``.

    Works with anything supporting ``+`` and scalar ``*``, including floats.
    """
    q1 = q + dt * tendency(q)
    q2 = q1 + dt * tendency(q1)
    q3 = 0.75 * q + 0.25 * q2
    q4 = q3 + dt * tendency(q3)
    return q / 3.0 + (2.0 / 3.0) * q4


@dataclass
class SerreModel:
    """Discrete Serre system on a flat bed.

    With only ``bc`` the boundary data are constant and the ghost cells of
    the initial fields are left as given. A ``solution`` boundary instead
    resamples ghosts and end velocities at every stage time.
    """

    grid: Grid
    bc: BoundarySpec
    g: float = GRAVITY
    solution: SolutionBoundary | None = None

    def boundary(self, q: np.ndarray, t: float) -> BoundarySpec:
        """Boundary data at time ``t``, writing ghost cells of ``q`` if they vary."""
        if self.solution is None:
            return self.bc
        return self.solution.fill(q, self.grid, t)

    def prepare(self, q: np.ndarray, bc: BoundarySpec):
        """Stage reconstruction and the velocity recovered from it."""
        rec = reconstruct_stage(q)
        return rec, solve_velocity(rec, self.grid, bc)

    def state(self, h_avg: np.ndarray, G_avg: np.ndarray, t: float = 0.0) -> SimulationState:
        q = np.vstack([h_avg, G_avg]).astype(float)
        self._check(q, "initialisation")
        rec, u = self.prepare(q, self.boundary(q, t))
        return SimulationState(t=t, q=q, u=u, rec=rec)

    def recover(self, q: np.ndarray, t: float = 0.0) -> NodalField:
        return self.prepare(q, self.boundary(q, t))[1]

    def tendency(self, q: np.ndarray, u: NodalField, bc: BoundarySpec | None = None, rec=None):
        """``(dq/dt, boundary flux difference)``; ghost columns of dq/dt are zero."""
        bc = self.bc if bc is None else bc
        rec = reconstruct_stage(q) if rec is None else rec
        fluxes = stage_fluxes(rec, u, self.grid, bc, self.g)
        dh, dG = flux_difference(fluxes, self.grid)
        dq = np.zeros_like(q)
        dq[0, self.grid.interior] = dh
        dq[1, self.grid.interior] = dG
        through = np.array([fluxes.h[0] - fluxes.h[-1], fluxes.G[0] - fluxes.G[-1]])
        return dq, through

    def cfl_dt(self, state: SimulationState, cr: float, t_stop: float | None = None) -> float:
        """``cr dx / (2 max(|u| + sqrt(g h)))``, clipped so ``t + dt`` does not pass ``t_stop``."""
        h = state.h[self.grid.interior]
        speed = float(np.max(np.abs(state.u.integer_nodes) + np.sqrt(self.g * h)))
        bc = self.bc if self.solution is None else self.solution.spec(self.grid, state.t)
        for h_b, u_b in ((bc.left_h, bc.left_u), (bc.right_h, bc.right_u)):
            speed = max(speed, abs(u_b) + np.sqrt(self.g * h_b))
        dt = cr * self.grid.dx / (2.0 * speed)
        if t_stop is not None and state.t + dt >= t_stop:
            dt = max(t_stop - state.t, 0.0)
        return float(dt)

    def _check(self, q: np.ndarray, stage: str) -> None:
        h = q[0, self.grid.interior]
        ok = (h > 0.0) & np.isfinite(h) & np.isfinite(q[1, self.grid.interior])
        if not np.all(ok):
            bad = np.flatnonzero(~ok)
            raise PositivityError(f"invalid depth after {stage} in cells {bad[:5].tolist()}")

    def euler_step(self, state: SimulationState, dt: float) -> np.ndarray:
        """Forward Euler update of the averages using ``state.u``."""
        bc = self.boundary(state.q, state.t)
        dq, _ = self.tendency(state.q, state.u, bc, state.rec)
        q = state.q + dt * dq
        self._check(q, "Euler step")
        self.boundary(q, state.t + dt)
        return q

    def ssp_rk3_step(self, state: SimulationState, dt: float) -> SimulationState:
        """Advance by ``dt``.

        ``state.u`` drives the first Euler stage; velocity is recovered
        before the second and third and once more for the new level, which
        the following step reuses.
        """
        t = state.t
        qn = state.q
        bc0 = self.boundary(qn, t)
        dq, b0 = self.tendency(qn, state.u, bc0, state.rec)
        q1 = qn + dt * dq
        self._check(q1, "stage 1")

        bc1 = self.boundary(q1, t + dt)
        rec1, u1 = self.prepare(q1, bc1)
        dq, b1 = self.tendency(q1, u1, bc1, rec1)
        q2 = q1 + dt * dq
        q3 = 0.75 * qn + 0.25 * q2
        self._check(q3, "stage 2")

        bc3 = self.boundary(q3, t + 0.5 * dt)
        rec3, u3 = self.prepare(q3, bc3)
        dq, b3 = self.tendency(q3, u3, bc3, rec3)
        q4 = q3 + dt * dq
        q_new = qn / 3.0 + (2.0 / 3.0) * q4
        self._check(q_new, "stage 3")

        w0, w1, w3 = STAGE_WEIGHTS
        flux = state.boundary_flux + dt * (w0 * b0 + w1 * b1 + w3 * b3)
        rec, u = self.prepare(q_new, self.boundary(q_new, t + dt))
        return SimulationState(
            t=t + dt, q=q_new, u=u, steps=state.steps + 1, boundary_flux=flux, rec=rec
        )

    def mass(self, state: SimulationState) -> float:
        return total(state.h, self.grid)

    def advance(
        self,
        state: SimulationState,
        controls: StepControls,
        output_times: Sequence[float] = (),
        callback: Callable[[SimulationState], None] | None = None,
    ) -> list[SimulationState]:
        """Step to ``controls.t_end``, returning copies at each output time.

        Steps are clipped to land exactly on output times. A failed step is
        retried once at half the step size before giving up.
        """
        targets = sorted({float(t) for t in output_times if 0.0 <= t <= controls.t_end})
        if not targets or targets[-1] != controls.t_end:
            targets.append(float(controls.t_end))
        snapshots = []
        pending = list(targets)
        while pending and pending[0] <= state.t:
            snapshots.append(state.copy())
            pending.pop(0)
        while pending:
            if state.steps >= controls.max_steps:
                raise StepFailure(f"max_steps={controls.max_steps} reached at t={state.t:.6g}")
            dt = self.cfl_dt(state, controls.cr, pending[0])
            try:
                state = self.ssp_rk3_step(state, dt)
            except (PositivityError, SingularSystemError) as exc:
                log.warning(
                    "step %d at t=%.9g (dt=%.3g) failed (%s); retrying with dt/2",
                    state.steps + 1, state.t, dt, exc,
                )
                try:
                    state = self.ssp_rk3_step(state, 0.5 * dt)
                except (PositivityError, SingularSystemError) as exc2:
                    raise StepFailure(
                        f"step {state.steps + 1} at t={state.t:.9g} failed twice: {exc2}"
                    ) from exc2
            if pending[0] - state.t <= 1e-12 * max(1.0, abs(pending[0])):
                state.t = pending[0]
                snapshots.append(state.copy())
                pending.pop(0)
            if callback is not None:
                callback(state)
        return snapshots


@dataclass
class Trajectory:
    """Snapshots of one run, with the model that produced them."""

    scenario: Scenario
    model: SerreModel
    snapshots: list[SimulationState]

    @property
    def final(self) -> SimulationState:
        return self.snapshots[-1]


def model_for(scenario: Scenario) -> SerreModel:
    return SerreModel(scenario.grid, scenario.bc, scenario.config.g, scenario.solution)


def run(config: ScenarioConfig | Scenario, callback=None) -> Trajectory:
    """Run a scenario to ``t_end`` with snapshots at its output times.

    The first snapshot is always the initial state and the last the state
    at ``t_end``.
    """
    scenario = config if isinstance(config, Scenario) else build(config)
    cfg = scenario.config
    model = model_for(scenario)
    state = model.state(scenario.initial.h, scenario.initial.G)
    controls = StepControls(cr=cfg.cr, t_end=cfg.t_end, max_steps=cfg.max_steps)
    times = sorted({0.0, *cfg.output_times, cfg.t_end})
    return Trajectory(scenario, model, model.advance(state, controls, times, callback))
