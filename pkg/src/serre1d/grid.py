"""Uniform 1D grid, ghost-padded cell fields and boundary handling.

Cell fields are stored as 1D arrays of length ``n_cells + 2 * N_GHOST``.
Index ``N_GHOST + j`` holds the average over interior cell ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

N_GHOST = 2
MIN_CELLS = 5

DEPTH = "depth_h"
MOMENTUM = "momentum_G"
QUANTITIES = (DEPTH, MOMENTUM)

# 3-point Gauss-Legendre on [-1, 1]
_GL_NODES = np.array([-np.sqrt(3.0 / 5.0), 0.0, np.sqrt(3.0 / 5.0)])
_GL_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 9.0


class GridError(ValueError):
    """Invalid grid or field construction."""


@dataclass(frozen=True)
class Grid:
    """Uniform partition of ``[x_min, x_max]`` into ``n_cells`` cells.

    ``dx`` is computed once at construction and reused everywhere.
    """

    x_min: float
    x_max: float
    n_cells: int
    dx: float = field(init=False)
    n_ghost: int = field(init=False, default=N_GHOST)

    def __post_init__(self):
        object.__setattr__(self, "dx", (self.x_max - self.x_min) / self.n_cells)

    @property
    def n_padded(self) -> int:
        return self.n_cells + 2 * self.n_ghost

    @property
    def interior(self) -> slice:
        return slice(self.n_ghost, self.n_ghost + self.n_cells)

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def padded_centers(self) -> np.ndarray:
        """Cell centers including ghost cells."""
        j = np.arange(-self.n_ghost, self.n_cells + self.n_ghost)
        return self.x_min + (j + 0.5) * self.dx

    @property
    def interfaces(self) -> np.ndarray:
        """The ``n_cells + 1`` interface coordinates ``x_{j-1/2}``."""
        return self.x_min + np.arange(self.n_cells + 1) * self.dx

    @property
    def nodes(self) -> np.ndarray:
        """All ``2 n_cells + 1`` finite element nodes, half and integer interleaved."""
        return self.x_min + np.arange(2 * self.n_cells + 1) * (0.5 * self.dx)

    def nearest_interface(self, x: float) -> float:
        k = int(round((x - self.x_min) / self.dx))
        k = min(max(k, 0), self.n_cells)
        return self.x_min + k * self.dx


def make_grid(x_min: float, x_max: float, n_cells: int) -> Grid:
    if not np.isfinite(x_min) or not np.isfinite(x_max):
        raise GridError("grid bounds must be finite")
    if x_max <= x_min:
        raise GridError(f"x_max ({x_max}) must exceed x_min ({x_min})")
    if int(n_cells) != n_cells or n_cells < MIN_CELLS:
        raise GridError(f"n_cells must be an integer >= {MIN_CELLS}, got {n_cells}")
    return Grid(float(x_min), float(x_max), int(n_cells))


@dataclass(frozen=True)
class BoundarySpec:
    """Dirichlet depth and velocity at both ends.

    ``left_du``/``right_du`` are the velocity gradients carried by the ghost
    cells into the boundary fluxes; a quiescent far field has none.
    """

    left_h: float
    left_u: float
    right_h: float
    right_u: float
    left_du: float = 0.0
    right_du: float = 0.0

    def __post_init__(self):
        if not (self.left_h > 0 and self.right_h > 0):
            raise GridError("boundary depths must be strictly positive")

    def ghost_values(self, quantity: str) -> tuple[float, float]:
        """Far-field (left, right) ghost value for ``quantity``.

        The far field has no velocity gradient, so G reduces to ``u * h``.
        """
        if quantity == DEPTH:
            return self.left_h, self.right_h
        if quantity == MOMENTUM:
            return self.left_u * self.left_h, self.right_u * self.right_h
        raise GridError(f"unknown quantity {quantity!r}")


@dataclass
class CellField:
    """Ghost-padded cell averages of one conserved quantity."""

    values: np.ndarray
    quantity: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.quantity not in QUANTITIES:
            raise GridError(f"unknown quantity {self.quantity!r}")
        if self.values.ndim != 1 or self.values.size < MIN_CELLS + 2 * N_GHOST:
            raise GridError("cell field must be a 1D ghost-padded array")
        if self.quantity == DEPTH and not np.all(self.values[N_GHOST:-N_GHOST] > 0):
            raise GridError("depth averages must be strictly positive")

    @property
    def interior(self) -> np.ndarray:
        return self.values[N_GHOST:-N_GHOST]

    def check_grid(self, grid: Grid) -> None:
        if self.values.size != grid.n_padded:
            raise GridError(
                f"field length {self.values.size} does not match grid ({grid.n_padded})"
            )


@dataclass
class NodalField:
    """Continuous piecewise-quadratic field sampled at element nodes.

    ``integer_nodes[j]`` is the value at the center of cell ``j`` and
    ``half_nodes[k]`` the value at interface ``x_{k-1/2}``.
    """

    integer_nodes: np.ndarray
    half_nodes: np.ndarray

    def __post_init__(self):
        self.integer_nodes = np.asarray(self.integer_nodes, dtype=float)
        self.half_nodes = np.asarray(self.half_nodes, dtype=float)
        if self.half_nodes.size != self.integer_nodes.size + 1:
            raise GridError("a nodal field needs one more half node than integer nodes")

    @classmethod
    def from_nodes(cls, u: np.ndarray) -> "NodalField":
        """Split the interleaved ``2 n + 1`` node vector."""
        u = np.asarray(u, dtype=float)
        return cls(integer_nodes=u[1::2], half_nodes=u[0::2])

    def nodes(self) -> np.ndarray:
        u = np.empty(2 * self.integer_nodes.size + 1)
        u[0::2] = self.half_nodes
        u[1::2] = self.integer_nodes
        return u


NodalVelocity = NodalField


@dataclass(frozen=True)
class SolutionBoundary:
    """Dirichlet data sampled from a known solution at every stage time.

    ``fields(x, t)`` returns ``(h, u, G, u_x)`` at the points ``x``. Ghost
    cells receive exact cell averages of ``h`` and ``G``; the velocity solve
    and boundary fluxes receive ``u`` and ``u_x`` at the domain ends.
    """

    fields: Callable

    def spec(self, grid: Grid, t: float) -> BoundarySpec:
        h, u, _, du = (np.asarray(v, dtype=float) for v in self.fields(np.array([grid.x_min, grid.x_max]), t))
        return BoundarySpec(
            left_h=float(h[0]),
            left_u=float(u[0]),
            right_h=float(h[1]),
            right_u=float(u[1]),
            left_du=float(du[0]),
            right_du=float(du[1]),
        )

    def fill(self, q: np.ndarray, grid: Grid, t: float) -> BoundarySpec:
        """Write ghost averages of ``(h, G)`` into ``q`` in place."""
        x = grid.padded_centers
        centers = np.r_[x[:N_GHOST], x[-N_GHOST:]]
        half = 0.5 * grid.dx
        # Gauss points of all ghost cells, then the two domain ends
        pts = np.concatenate([(centers[:, None] + half * _GL_NODES).ravel(), [grid.x_min, grid.x_max]])
        h, u, G, du = (np.asarray(v, dtype=float) for v in self.fields(pts, t))
        n_gauss = centers.size * _GL_NODES.size
        for row, vals in ((0, h), (1, G)):
            avg = 0.5 * (vals[:n_gauss].reshape(centers.size, -1) @ _GL_WEIGHTS)
            q[row, :N_GHOST] = avg[:N_GHOST]
            q[row, -N_GHOST:] = avg[N_GHOST:]
        return BoundarySpec(
            left_h=float(h[-2]),
            left_u=float(u[-2]),
            right_h=float(h[-1]),
            right_u=float(u[-1]),
            left_du=float(du[-2]),
            right_du=float(du[-1]),
        )


def fill_ghost_values(values: np.ndarray, left: float, right: float) -> np.ndarray:
    """Overwrite the ghost layers of ``values`` in place and return it."""
    values[:N_GHOST] = left
    values[-N_GHOST:] = right
    return values


def fill_ghosts(field: CellField, bc: BoundarySpec) -> CellField:
    left, right = bc.ghost_values(field.quantity)
    values = fill_ghost_values(field.values.copy(), left, right)
    return CellField(values, field.quantity)


def averages_to_points(values: np.ndarray) -> np.ndarray:
    """Point values at interior cell centers from ghost-padded averages.

    Uses ``(-q[j-1] + 26 q[j] - q[j+1]) / 24``, exact for quadratics.
    """
    values = np.asarray(values, dtype=float)
    g = N_GHOST
    size = values.shape[-1]
    centre = values[..., g : size - g]
    left = values[..., g - 1 : size - g - 1]
    right = values[..., g + 1 : size - g + 1]
    return (26.0 * centre - left - right) / 24.0


def cell_average(f: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Average of ``f`` over each ``[a, b]`` by 3-point Gauss-Legendre."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    total = np.zeros_like(mid)
    for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
        total += weight * np.asarray(f(mid + half * node), dtype=float)
    return 0.5 * total


def function_to_averages(
    f: Callable[[np.ndarray], np.ndarray], grid: Grid, quantity: str = DEPTH
) -> CellField:
    """Cell averages of ``f`` over every cell, ghosts included.

    Ghost cells extend past the domain, so ``f`` is evaluated there too.
    Callers with Dirichlet data overwrite them with :func:`fill_ghosts`.
    """
    x = grid.padded_centers
    half = 0.5 * grid.dx
    return CellField(cell_average(f, x - half, x + half), quantity)


def total(values: np.ndarray, grid: Grid) -> float:
    """Integral of a ghost-padded field over the interior, ``sum(q) * dx``."""
    return float(np.sum(values[grid.interior]) * grid.dx)
