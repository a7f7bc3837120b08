"""Koren-limited kappa = 1/3 reconstruction of interface values.

Convention: at interface ``x_{j+1/2}``, ``minus`` is extrapolated from the
left cell ``j`` and ``plus`` from the right cell ``j + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import N_GHOST, averages_to_points

KAPPA = 1.0 / 3.0
EPS_RATIO = 1e-12


@dataclass(frozen=True)
class LimiterParams:
    kappa: float = KAPPA
    epsilon_ratio: float = EPS_RATIO

    def __post_init__(self):
        if self.kappa != KAPPA:
            raise ValueError("the Koren limiter is only third order for kappa = 1/3")
        if not self.epsilon_ratio > 0:
            raise ValueError("epsilon_ratio must be positive")


@dataclass
class EdgeStates:
    """Limited values on either side of each interface."""

    minus: np.ndarray
    plus: np.ndarray


def slope_ratio(q_left, q_centre, q_right, eps: float = EPS_RATIO):
    """Ratio of consecutive differences ``(q[j+1] - q[j]) / (q[j] - q[j-1])``.

    A difference below ``eps * max(1, |q[j]|)`` counts as zero: two flat
    differences give 1, a flat denominator alone gives ``numerator / tol``
    carrying the denominator's sign.
    """
    q_left, q_centre, q_right = np.broadcast_arrays(
        *(np.asarray(q, dtype=float) for q in (q_left, q_centre, q_right))
    )
    d_minus = q_centre - q_left
    d_plus = q_right - q_centre
    tol = eps * np.maximum(1.0, np.abs(q_centre))
    flat_minus = np.abs(d_minus) < tol
    flat_both = flat_minus & (np.abs(d_plus) < tol)
    sign = np.where(d_minus < 0, -1.0, 1.0)
    denom = np.where(flat_minus, sign * tol, d_minus)
    r = np.where(flat_both, 1.0, d_plus / denom)
    return r if r.ndim else float(r)


def koren_minus(r):
    """Limiter for the right-edge value of a cell."""
    r = np.asarray(r, dtype=float)
    phi = np.maximum(0.0, np.minimum(np.minimum(2.0 * r, (1.0 + 2.0 * r) / 3.0), 2.0))
    return phi if phi.ndim else float(phi)


def koren_plus(r):
    """Limiter for the left-edge value of a cell."""
    r = np.asarray(r, dtype=float)
    phi = np.maximum(0.0, np.minimum(np.minimum(2.0 * r, (2.0 + r) / 3.0), 2.0))
    return phi if phi.ndim else float(phi)


def limited_edges(q_left, q_centre, q_right, eps: float = EPS_RATIO):
    """Left- and right-edge values of the cells whose averages are ``q_centre``.

    Returns ``(left_edge, right_edge)``, i.e. ``q+_{j-1/2}`` and ``q-_{j+1/2}``.
    """
    q_left = np.asarray(q_left, dtype=float)
    q_centre = np.asarray(q_centre, dtype=float)
    r = np.asarray(slope_ratio(q_left, q_centre, q_right, eps))
    d_minus = q_centre - q_left
    right_edge = q_centre + 0.5 * koren_minus(r) * d_minus
    left_edge = q_centre - 0.5 * koren_plus(r) * d_minus
    return left_edge, right_edge


def cell_edges(values: np.ndarray, eps: float = EPS_RATIO):
    """Edge values for every cell that has both neighbours in ``values``.

    For a ghost-padded field this is the interior plus one ghost per side,
    i.e. cells ``-1 .. n_cells``, returned as ``(left_edge, right_edge)``.
    Leading axes are treated as independent fields.
    """
    values = np.asarray(values, dtype=float)
    return limited_edges(values[..., :-2], values[..., 1:-1], values[..., 2:], eps)


def reconstruct(values: np.ndarray, eps: float = EPS_RATIO) -> EdgeStates:
    """Interface states at the ``n_cells + 1`` interfaces of the interior.

    ``values`` must be ghost-padded with :data:`~serre1d.grid.N_GHOST` layers.
    """
    values = np.asarray(values, dtype=float)
    if N_GHOST != 2:  # pragma: no cover - layout guard
        raise RuntimeError("reconstruction assumes two ghost layers")
    left_edge, right_edge = cell_edges(values, eps)
    # cell_edges covers cells -1..n; interface k sits between cells k-1 and k
    return EdgeStates(minus=right_edge[..., :-1], plus=left_edge[..., 1:])


@dataclass
class StageReconstruction:
    """Everything the velocity solve and the fluxes need from one set of averages.

    ``left`` and ``right`` are the limited edge values of cells ``-1 .. n``
    and ``points`` the center point values of the interior cells; each has
    one row per conserved quantity.
    """

    left: np.ndarray
    right: np.ndarray
    points: np.ndarray

    @property
    def interior_left(self) -> np.ndarray:
        return self.left[..., 1:-1]

    @property
    def interior_right(self) -> np.ndarray:
        return self.right[..., 1:-1]

    def interfaces(self) -> EdgeStates:
        return EdgeStates(minus=self.right[..., :-1], plus=self.left[..., 1:])


def reconstruct_stage(q: np.ndarray, eps: float = EPS_RATIO) -> StageReconstruction:
    """Reconstruct all rows of a ghost-padded ``(quantities, cells)`` array."""
    q = np.asarray(q, dtype=float)
    left, right = cell_edges(q, eps)
    return StageReconstruction(left=left, right=right, points=averages_to_points(q))
