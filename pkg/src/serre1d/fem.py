"""Quadratic Galerkin recovery of velocity from depth and G.

Solves ``G = u h - (h^3 u_x / 3)_x`` on elements that coincide with the
finite volume cells. Each element carries nodes at its two edges and its
center, so a grid of ``n`` cells gives ``2 n + 1`` unknowns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from .banded import banded_solve, table_solve
from .flux import PositivityError

from .grid import BoundarySpec, Grid, NodalField
from .reconstruction import StageReconstruction, reconstruct_stage

# Stiffness entries times 3780 dx, as cubic polynomials in the element depths.
# Keys are exponents of (h_left, h_mid, h_right).
_Q11 = {
    (1, 2, 0): 912, (2, 1, 0): 948, (0, 0, 3): 61, (1, 0, 2): 21, (2, 0, 1): -195,
    (0, 2, 1): -240, (1, 1, 1): -336, (0, 3, 0): 832, (3, 0, 0): 853, (0, 1, 2): 84,
}
_Q12 = {
    (0, 1, 2): -240, (0, 0, 3): -284, (2, 1, 0): -1104, (1, 1, 1): 384, (3, 0, 0): -1076,
    (0, 3, 0): -512, (1, 2, 0): -960, (2, 0, 1): 228, (1, 0, 2): 12, (0, 2, 1): 192,
}
_Q13 = {
    (2, 1, 0): 156, (2, 0, 1): -33, (1, 0, 2): -33, (0, 1, 2): 156, (0, 2, 1): 48,
    (1, 1, 1): -48, (0, 0, 3): 223, (0, 3, 0): -320, (3, 0, 0): 223, (1, 2, 0): 48,
}
_Q22 = {
    (2, 1, 0): 1344, (2, 0, 1): -240, (1, 2, 0): 768, (1, 0, 2): -240, (0, 2, 1): 768,
    (0, 1, 2): 1344, (3, 0, 0): 1360, (0, 3, 0): 1024, (0, 0, 3): 1360, (1, 1, 1): -768,
}
_Q23 = {
    (2, 0, 1): 12, (2, 1, 0): -240, (0, 1, 2): -1104, (1, 2, 0): 192, (0, 2, 1): -960,
    (0, 3, 0): -512, (0, 0, 3): -1076, (1, 0, 2): 228, (3, 0, 0): -284, (1, 1, 1): 384,
}
_Q33 = {
    (1, 1, 1): -336, (1, 0, 2): -195, (0, 2, 1): 912, (0, 1, 2): 948, (0, 3, 0): 832,
    (0, 0, 3): 853, (3, 0, 0): 61, (2, 1, 0): 84, (2, 0, 1): 21, (1, 2, 0): -240,
}
STIFFNESS_TABLE = (
    (_Q11, _Q12, _Q13),
    (_Q12, _Q22, _Q23),
    (_Q13, _Q23, _Q33),
)
STIFFNESS_SCALE = 3780.0

# Mass entries times 420 / dx, linear in (h_left, h_mid, h_right).
MASS_TABLE = np.array(
    [
        [[39, 20, -3], [20, 16, -8], [-3, -8, -3]],
        [[20, 16, -8], [16, 192, 16], [-8, 16, 20]],
        [[-3, -8, -3], [-8, 16, 20], [-3, 20, 39]],
    ],
    dtype=float,
)
MASS_SCALE = 420.0

# Load vector times 30 / dx, linear in (G_left, G_mid, G_right).
LOAD_TABLE = np.array([[4, 2, -1], [2, 16, 2], [-1, 2, 4]], dtype=float)
LOAD_SCALE = 30.0

BANDWIDTH = 2
PIVOT_TOL = 1e-13


class SingularSystemError(np.linalg.LinAlgError):
    """The banded system is singular, or numerically so, at ``row``."""

    def __init__(self, row: int, pivot: float):
        self.row = row
        self.pivot = pivot
        super().__init__(f"banded solve failed: pivot {pivot:.3e} at row {row}")


@dataclass
class ElementCoefficients:
    """Per-element depth and G at the left edge, center and right edge.

    Each field may be a scalar or an array over elements. Edge values are
    the element's own limited reconstructions and may jump between elements.
    """

    h_left: np.ndarray
    h_mid: np.ndarray
    h_right: np.ndarray
    G_left: np.ndarray
    G_mid: np.ndarray
    G_right: np.ndarray
    dx: float

    def __post_init__(self):
        for name in ("h_left", "h_mid", "h_right", "G_left", "G_mid", "G_right"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (np.all(self.h_left > 0) and np.all(self.h_mid > 0) and np.all(self.h_right > 0)):
            raise ValueError("element depths must be strictly positive")
        if not self.dx > 0:
            raise ValueError("element width must be positive")


_MONOMIALS = sorted(_Q11)
_UPPER = [(i, j) for i in range(3) for j in range(i, 3)]
_STIFFNESS_MATRIX = np.array(
    [[STIFFNESS_TABLE[i][j][m] for m in _MONOMIALS] for i, j in _UPPER], dtype=float
)
_MONOMIAL_EXPONENTS = np.array(_MONOMIALS, dtype=np.int64)
_UPPER_INDEX = np.array(_UPPER, dtype=np.int64)


def _depths(coeffs: ElementCoefficients):
    hl, hm, hr = np.broadcast_arrays(coeffs.h_left, coeffs.h_mid, coeffs.h_right)
    return hl.shape, np.stack([hl.ravel(), hm.ravel(), hr.ravel()])


def _stiffness_blocks(coeffs: ElementCoefficients) -> np.ndarray:
    shape, H = _depths(coeffs)
    powers = [[np.ones_like(h), h, h * h, h * h * h] for h in H]
    basis = np.stack([powers[0][a] * powers[1][b] * powers[2][c] for a, b, c in _MONOMIALS])
    upper = _STIFFNESS_MATRIX @ basis / (STIFFNESS_SCALE * coeffs.dx)
    Q = np.empty((3, 3, H.shape[1]))
    for k, (i, j) in enumerate(_UPPER):
        Q[i, j] = upper[k]
        Q[j, i] = upper[k]
    return Q


def _mass_blocks(coeffs: ElementCoefficients) -> np.ndarray:
    shape, H = _depths(coeffs)
    return (MASS_TABLE.reshape(9, 3) @ H).reshape(3, 3, -1) * (coeffs.dx / MASS_SCALE)


def _load_blocks(coeffs: ElementCoefficients) -> np.ndarray:
    Gs = np.stack([g.ravel() for g in np.broadcast_arrays(coeffs.G_left, coeffs.G_mid, coeffs.G_right)])
    return LOAD_TABLE @ Gs * (coeffs.dx / LOAD_SCALE)


def _element_major(blocks: np.ndarray, shape: tuple) -> np.ndarray:
    return np.moveaxis(blocks, -1, 0).reshape(shape + blocks.shape[:-1])


def element_stiffness(coeffs: ElementCoefficients) -> np.ndarray:
    """Stiffness matrices ``int h^3 / 3 w_i' w_j' dx``, shape ``(..., 3, 3)``."""
    return _element_major(_stiffness_blocks(coeffs), _depths(coeffs)[0])


def element_mass(coeffs: ElementCoefficients) -> np.ndarray:
    """Depth-weighted mass matrices ``int h w_i w_j dx``, shape ``(..., 3, 3)``."""
    return _element_major(_mass_blocks(coeffs), _depths(coeffs)[0])


def element_load(coeffs: ElementCoefficients) -> np.ndarray:
    """Load vectors ``int G w_i dx``, shape ``(..., 3)``."""
    shape = np.broadcast_shapes(coeffs.G_left.shape, coeffs.G_mid.shape, coeffs.G_right.shape)
    return _element_major(_load_blocks(coeffs), shape)


@dataclass
class BandedSystem:
    """Pentadiagonal system in LAPACK band storage.

    ``matrix[BANDWIDTH + i - j, j]`` holds ``A[i, j]``.
    """

    matrix: np.ndarray
    rhs: np.ndarray

    @property
    def size(self) -> int:
        return self.rhs.size

    def to_dense(self) -> np.ndarray:
        n = self.size
        A = np.zeros((n, n))
        for d in range(-BANDWIDTH, BANDWIDTH + 1):
            cols = np.arange(max(0, d), min(n, n + d))
            A[cols - d, cols] = self.matrix[BANDWIDTH - d, cols]
        return A

    def matvec(self, u: np.ndarray) -> np.ndarray:
        out = self.matrix[BANDWIDTH] * u
        for d in range(1, BANDWIDTH + 1):
            out[:-d] += self.matrix[BANDWIDTH - d, d:] * u[d:]
            out[d:] += self.matrix[BANDWIDTH + d, :-d] * u[:-d]
        return out


def assemble(Q: np.ndarray, P: np.ndarray, R: np.ndarray, alpha: float, beta: float) -> BandedSystem:
    """Sum element blocks into the global system and impose ``u = alpha, beta`` at the ends.

    Element ``e`` owns global nodes ``2e, 2e + 1, 2e + 2``; neighbouring
    elements share their common edge node.
    """
    K = np.asarray(Q, dtype=float).reshape(-1, 3, 3) + np.asarray(P, dtype=float).reshape(-1, 3, 3)
    R = np.asarray(R, dtype=float).reshape(-1, 3)
    n_el = K.shape[0]
    size = 2 * n_el + 1
    ab = np.zeros((2 * BANDWIDTH + 1, size))
    rhs = np.zeros(size)
    stop = 2 * n_el
    for a in range(3):
        rhs[a : a + stop : 2] += R[:, a]
        for b in range(3):
            ab[BANDWIDTH + a - b, b : b + stop : 2] += K[:, a, b]

    for row, value in ((0, alpha), (size - 1, beta)):
        for col in range(max(0, row - BANDWIDTH), min(size, row + BANDWIDTH + 1)):
            ab[BANDWIDTH + row - col, col] = 0.0
        ab[BANDWIDTH, row] = 1.0
        rhs[row] = value
    return BandedSystem(matrix=ab, rhs=rhs)


def solve_banded(system: BandedSystem, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Banded LU with partial pivoting inside the band.

    Raises :class:`SingularSystemError` naming the first row whose pivot is
    below ``pivot_tol`` relative to the largest matrix entry.
    """
    x, row, pivot = banded_solve(system.matrix, system.rhs, BANDWIDTH, BANDWIDTH, pivot_tol)
    if row >= 0:
        raise SingularSystemError(row=int(row), pivot=float(pivot))
    return x


def element_coefficients(rec: StageReconstruction, dx: float) -> ElementCoefficients:
    """Element data for the interior cells of a stage reconstruction."""
    left = rec.interior_left
    right = rec.interior_right
    return ElementCoefficients(
        h_left=left[0],
        h_mid=rec.points[0],
        h_right=right[0],
        G_left=left[1],
        G_mid=rec.points[1],
        G_right=right[1],
        dx=dx,
    )


def velocity_system(rec: StageReconstruction, grid: Grid, bc: BoundarySpec) -> BandedSystem:
    coeffs = element_coefficients(rec, grid.dx)
    return assemble(
        element_stiffness(coeffs),
        element_mass(coeffs),
        element_load(coeffs),
        bc.left_u,
        bc.right_u,
    )


def solve_velocity(
    rec: StageReconstruction, grid: Grid, bc: BoundarySpec, pivot_tol: float = PIVOT_TOL
) -> NodalField:
    """Nodal velocity for a stage reconstruction.

    Assembles and factorises in one compiled pass; :func:`velocity_system`
    with :func:`solve_banded` gives the same result through explicit storage.
    """
    dx = grid.dx
    left, right = rec.interior_left, rec.interior_right
    H = np.stack([left[0], rec.points[0], right[0]])
    if not np.all(H > 0.0):
        bad = np.flatnonzero(~np.all(H > 0.0, axis=0))
        raise PositivityError(f"non-positive element depth in element(s) {bad[:5].tolist()}")
    Gv = np.stack([left[1], rec.points[1], right[1]])
    x, row, pivot = table_solve(
        H,
        Gv,
        _STIFFNESS_MATRIX / (STIFFNESS_SCALE * dx),
        _MONOMIAL_EXPONENTS,
        _UPPER_INDEX,
        MASS_TABLE * (dx / MASS_SCALE),
        LOAD_TABLE * (dx / LOAD_SCALE),
        bc.left_u,
        bc.right_u,
        pivot_tol,
    )
    if row >= 0:
        raise SingularSystemError(row=int(row), pivot=float(pivot))
    return NodalField.from_nodes(x)


def recover_velocity(h_avg: np.ndarray, G_avg: np.ndarray, grid: Grid, bc: BoundarySpec) -> NodalField:
    """Velocity at every element node for ghost-padded ``(h_avg, G_avg)``.

    Centers use the cell-average to point-value stencil and element edges
    the limited reconstruction of the same cell.
    """
    return solve_velocity(reconstruct_stage(np.vstack([h_avg, G_avg])), grid, bc)
