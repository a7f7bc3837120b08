"""Error norms, conservation diagnostics, convergence fits and linear theory."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .flux import GRAVITY
from .grid import averages_to_points
from .integrator import Trajectory, run
from .scenarios import ScenarioConfig, SolitonParams, soliton_state


class AnalysisError(ValueError):
    """Invalid input to a diagnostic."""


def l1_norm(sim, exact) -> float:
    """Relative L1 error ``sum |sim - exact| / sum |exact|``."""
    sim = np.asarray(sim, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if sim.shape != exact.shape:
        raise AnalysisError(f"shape mismatch: {sim.shape} vs {exact.shape}")
    denom = np.sum(np.abs(exact))
    if denom == 0.0:
        raise AnalysisError("exact values are identically zero")
    return float(np.sum(np.abs(sim - exact)) / denom)


def l2_error(sim, exact, dx: float) -> float:
    """Discrete L2 error ``sqrt(dx * sum (sim - exact)^2)``."""
    diff = np.asarray(sim, dtype=float) - np.asarray(exact, dtype=float)
    return float(math.sqrt(dx * np.sum(diff * diff)))


@dataclass(frozen=True)
class DispersionResult:
    """Linearised wave frequencies and speeds about still depth ``h0``, flow ``u0``."""

    omega_plus: float
    omega_minus: float
    v_phase: float
    v_group: float
    mu: float


def dispersion(k: float, h0: float, u0: float = 0.0, g: float = GRAVITY) -> DispersionResult:
    """Frequencies ``u0 k +- k sqrt(g h0) sqrt(3 / (mu^2 + 3))``, ``mu = h0 k``.

    Phase and group speeds refer to the ``+`` branch; the group speed is
    ``d omega_plus / dk = u0 + sqrt(g h0) sqrt(3) * 3 / (mu^2 + 3)^(3/2)``.
    """
    if not (k > 0 and h0 > 0):
        raise AnalysisError("dispersion needs k > 0 and h0 > 0")
    mu = h0 * k
    c0 = math.sqrt(g * h0)
    factor = math.sqrt(3.0 / (mu * mu + 3.0))
    omega_plus = u0 * k + k * c0 * factor
    omega_minus = u0 * k - k * c0 * factor
    v_group = u0 + c0 * 3.0 * math.sqrt(3.0) / (mu * mu + 3.0) ** 1.5
    return DispersionResult(omega_plus, omega_minus, omega_plus / k, v_group, mu)


def pressure_profile(h, u_x, u_xx, u_xt, u, xi, rho: float = 1000.0, g: float = GRAVITY, p_a: float = 0.0):
    """Pressure at depth ``xi`` below the surface.

    ``p = p_a + rho g xi + rho/2 xi (2 h - xi) (u_x^2 - u u_xx - u_xt)``.
    """
    xi = np.asarray(xi, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(xi < 0) or np.any(xi > h):
        raise AnalysisError("depth below surface must satisfy 0 <= xi <= h")
    return p_a + rho * g * xi + 0.5 * rho * xi * (2.0 * h - xi) * (u_x * u_x - u * u_xx - u_xt)


@dataclass(frozen=True)
class ConservationRow:
    t: float
    mass: float
    G_total: float
    boundary_mass: float
    boundary_G: float

    @property
    def mass_balance(self) -> float:
        """Total depth with accumulated boundary inflow removed; constant in time."""
        return self.mass - self.boundary_mass


def conservation_report(trajectory: Trajectory) -> list[ConservationRow]:
    """Domain totals of depth and G and accumulated boundary fluxes per snapshot."""
    if not trajectory.snapshots:
        raise AnalysisError("trajectory has no snapshots")
    grid = trajectory.model.grid
    rows = []
    for s in trajectory.snapshots:
        rows.append(
            ConservationRow(
                t=s.t,
                mass=float(np.sum(s.h[grid.interior]) * grid.dx),
                G_total=float(np.sum(s.G[grid.interior]) * grid.dx),
                boundary_mass=float(s.boundary_flux[0]),
                boundary_G=float(s.boundary_flux[1]),
            )
        )
    return rows


@dataclass(frozen=True)
class ConvergenceRow:
    dx: float
    l1_h: float
    l1_u: float


@dataclass(frozen=True)
class ConvergenceResult:
    rows: tuple[ConvergenceRow, ...]
    slope_h: float
    slope_u: float


def fit_slope(dx: Sequence[float], err: Sequence[float]) -> float:
    """Least-squares slope of ``log(err)`` against ``log(dx)``."""
    dx = np.asarray(dx, dtype=float)
    err = np.asarray(err, dtype=float)
    if dx.size < 2:
        raise AnalysisError("a slope needs at least two points")
    if np.any(dx <= 0) or np.any(err <= 0):
        raise AnalysisError("dx and errors must be positive")
    return float(np.polyfit(np.log(dx), np.log(err), 1)[0])


def soliton_errors(trajectory: Trajectory) -> ConvergenceRow:
    """L1 errors of the final snapshot against the exact solitary wave.

    Depth averages are converted to center point values first; velocity
    is already nodal.
    """
    cfg = trajectory.scenario.config
    p = cfg.params
    params = SolitonParams(p["a0"], p["a1"], cfg.g, p["x0"])
    final = trajectory.final
    grid = trajectory.model.grid
    h_exact, u_exact, _ = soliton_state(params, grid.centers, final.t)
    return ConvergenceRow(
        dx=grid.dx,
        l1_h=l1_norm(averages_to_points(final.h), h_exact),
        l1_u=l1_norm(final.u.integer_nodes, u_exact),
    )


def _ladder_entry(config: ScenarioConfig) -> ConvergenceRow:
    return soliton_errors(run(config))


def convergence_study(
    scenario: ScenarioConfig,
    dx_ladder: Sequence[float],
    cr: float | None = None,
    t_end: float | None = None,
    workers: int = 1,
) -> ConvergenceResult:
    """Run the soliton at each ``dx`` and fit the L1 decay rate.

    ``scenario`` supplies domain and wave parameters; its ``n_cells`` is
    replaced per entry. With ``workers > 1`` entries run in separate processes.
    """
    if scenario.scenario != "soliton":
        raise AnalysisError("convergence studies need the soliton's exact solution")
    if len(dx_ladder) < 2:
        raise AnalysisError("a ladder needs at least two resolutions")
    length = scenario.x_max - scenario.x_min
    configs = []
    for dx in dx_ladder:
        n = int(round(length / dx))
        if not math.isclose(n * dx, length, rel_tol=1e-9):
            raise AnalysisError(f"dx={dx} does not divide the domain length {length}")
        configs.append(
            replace(
                scenario,
                n_cells=n,
                cr=scenario.cr if cr is None else cr,
                t_end=scenario.t_end if t_end is None else t_end,
                output_times=(),
            )
        )
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(_ladder_entry, configs))
    else:
        rows = tuple(_ladder_entry(c) for c in configs)
    return ConvergenceResult(
        rows=rows,
        slope_h=fit_slope([r.dx for r in rows], [r.l1_h for r in rows]),
        slope_u=fit_slope([r.dx for r in rows], [r.l1_u for r in rows]),
    )


def crest(x: np.ndarray, h: np.ndarray) -> tuple[float, float]:
    """Location and height of the maximum of ``h`` from a parabola through its top three points."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    j = int(np.argmax(h))
    if j == 0 or j == h.size - 1:
        return float(x[j]), float(h[j])
    hl, hc, hr = h[j - 1], h[j], h[j + 1]
    curvature = hl - 2.0 * hc + hr
    if curvature == 0.0:
        return float(x[j]), float(hc)
    shift = 0.5 * (hl - hr) / curvature
    dx = x[j + 1] - x[j]
    return float(x[j] + shift * dx), float(hc - 0.25 * (hl - hr) * shift)
