"""Physical and central-upwind numerical fluxes for the (h, G) system."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import BoundarySpec, Grid, NodalField
from .reconstruction import StageReconstruction, reconstruct_stage

GRAVITY = 9.81


class PositivityError(ArithmeticError):
    """A depth value dropped to zero or below."""


@dataclass
class ConservedPair:
    h: np.ndarray
    G: np.ndarray


@dataclass
class WaveSpeeds:
    a_plus: np.ndarray
    a_minus: np.ndarray


def physical_flux(h, G, u, du_dx, g: float = GRAVITY):
    """Flux ``(u h, G u + g h^2 / 2 - 2 h^3 u_x^2 / 3)``."""
    h = np.asarray(h, dtype=float)
    f1 = u * h
    f2 = G * u + 0.5 * g * h * h - (2.0 / 3.0) * h**3 * du_dx * du_dx
    return f1, f2


def edge_du_dx(u_left, u_mid, u_right, dx: float, side: str):
    """Derivative of the cell quadratic through ``u_{j-1/2}, u_j, u_{j+1/2}``.

    ``side`` is ``"left"`` for ``x_{j-1/2}`` or ``"right"`` for ``x_{j+1/2}``.
    """
    if side == "left":
        return (-u_right + 4.0 * u_mid - 3.0 * u_left) / dx
    if side == "right":
        return (3.0 * u_right - 4.0 * u_mid + u_left) / dx
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def local_speeds(h_minus, u_minus, h_plus, u_plus, g: float = GRAVITY) -> WaveSpeeds:
    """One-sided wave speed bounds from shallow-water characteristic speeds."""
    c_minus = np.sqrt(g * np.asarray(h_minus, dtype=float))
    c_plus = np.sqrt(g * np.asarray(h_plus, dtype=float))
    a_plus = np.maximum(np.maximum(u_minus + c_minus, u_plus + c_plus), 0.0)
    a_minus = np.minimum(np.minimum(u_minus - c_minus, u_plus - c_plus), 0.0)
    return WaveSpeeds(a_plus=a_plus, a_minus=a_minus)


def central_upwind_flux(q_minus, q_plus, f_minus, f_plus, speeds: WaveSpeeds):
    """Kurganov-type central-upwind flux; zero where both speeds vanish."""
    ap = np.asarray(speeds.a_plus, dtype=float)
    am = np.asarray(speeds.a_minus, dtype=float)
    width = ap - am
    degenerate = width <= 0.0
    safe = np.where(degenerate, 1.0, width)
    flux = (ap * f_minus - am * f_plus + ap * am * (np.asarray(q_plus) - q_minus)) / safe
    return np.where(degenerate, 0.0, flux)


@dataclass
class InterfaceFluxes:
    """Numerical fluxes at the ``n_cells + 1`` interfaces of the interior."""

    h: np.ndarray
    G: np.ndarray


def stage_fluxes(
    rec: StageReconstruction,
    u: NodalField,
    grid: Grid,
    bc: BoundarySpec,
    g: float = GRAVITY,
) -> InterfaceFluxes:
    """Central-upwind fluxes from a stage reconstruction and its velocity.

    The velocity is continuous, so both sides of an interface share the nodal
    value; the gradient comes from each side's own cell quadratic. Ghost cells
    carry the boundary velocity and gradient from ``bc``.
    """
    edges = rec.interfaces()
    h_minus, G_minus = edges.minus
    h_plus, G_plus = edges.plus
    if not (np.all(h_minus > 0.0) and np.all(h_plus > 0.0)):
        bad = np.flatnonzero(~(h_minus > 0.0) | ~(h_plus > 0.0))
        raise PositivityError(f"non-positive reconstructed depth at interface(s) {bad[:5].tolist()}")

    dx = grid.dx
    u_half = u.half_nodes
    u_int = u.integer_nodes
    du_minus = np.empty_like(u_half)
    du_plus = np.empty_like(u_half)
    du_minus[0] = bc.left_du
    du_minus[1:] = edge_du_dx(u_half[:-1], u_int, u_half[1:], dx, "right")
    du_plus[:-1] = edge_du_dx(u_half[:-1], u_int, u_half[1:], dx, "left")
    du_plus[-1] = bc.right_du
    u_minus = u_half.copy()
    u_plus = u_half.copy()
    u_minus[0] = bc.left_u
    u_plus[-1] = bc.right_u

    f1m, f2m = physical_flux(h_minus, G_minus, u_minus, du_minus, g)
    f1p, f2p = physical_flux(h_plus, G_plus, u_plus, du_plus, g)
    speeds = local_speeds(h_minus, u_minus, h_plus, u_plus, g)
    F_h = central_upwind_flux(h_minus, h_plus, f1m, f1p, speeds)
    F_G = central_upwind_flux(G_minus, G_plus, f2m, f2p, speeds)
    return InterfaceFluxes(h=F_h, G=F_G)


def interface_fluxes(
    h_avg: np.ndarray,
    G_avg: np.ndarray,
    u: NodalField,
    grid: Grid,
    bc: BoundarySpec,
    g: float = GRAVITY,
) -> InterfaceFluxes:
    """Fluxes at the ``n_cells + 1`` interfaces for ghost-padded averages."""
    return stage_fluxes(reconstruct_stage(np.vstack([h_avg, G_avg])), u, grid, bc, g)


def flux_difference(fluxes: InterfaceFluxes, grid: Grid):
    """Semi-discrete tendencies ``-(F_{j+1/2} - F_{j-1/2}) / dx`` on the interior."""
    dh = -(fluxes.h[1:] - fluxes.h[:-1]) / grid.dx
    dG = -(fluxes.G[1:] - fluxes.G[:-1]) / grid.dx
    return dh, dG


def spatial_operator(
    h_avg: np.ndarray,
    G_avg: np.ndarray,
    u: NodalField,
    grid: Grid,
    bc: BoundarySpec,
    g: float = GRAVITY,
):
    """Tendencies ``(dh/dt, dG/dt)`` for interior cells.

    ``u`` must be the velocity recovered from the same ``(h_avg, G_avg)``.
    """
    if h_avg.size != grid.n_padded or G_avg.size != grid.n_padded:
        raise ValueError("fields must be ghost-padded to the grid size")
    if u.integer_nodes.size != grid.n_cells:
        raise ValueError("velocity does not match the grid")
    return flux_difference(interface_fluxes(h_avg, G_avg, u, grid, bc, g), grid)

