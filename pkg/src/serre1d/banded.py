"""Banded LU solve with partial pivoting confined to the band.

LAPACK's unblocked band factorisation spends most of its time in per-row
BLAS calls when the bandwidth is 2, so the elimination is compiled here.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _eliminate(W, b, kl, ku, tol):
    """LU-solve in place on row-band storage ``W[i, c] = A[i, i - kl + c]``.

    ``W`` needs ``kl`` spare columns on the right for pivoting fill-in.
    """
    n = b.size
    width = W.shape[1]
    scale = 0.0
    for i in range(n):
        for c in range(width):
            scale = max(scale, abs(W[i, c]))
    thresh = tol * scale

    for j in range(n):
        last = min(n - 1, j + kl)
        p = j
        best = abs(W[j, kl])
        for i in range(j + 1, last + 1):
            v = abs(W[i, j - i + kl])
            if v > best:
                best = v
                p = i
        if not best > thresh:
            return j, best
        top = min(n - 1, j + kl + ku)
        if p != j:
            for col in range(j, top + 1):
                tmp = W[j, col - j + kl]
                W[j, col - j + kl] = W[p, col - p + kl]
                W[p, col - p + kl] = tmp
            tmp = b[j]
            b[j] = b[p]
            b[p] = tmp
        pivot = W[j, kl]
        for i in range(j + 1, last + 1):
            factor = W[i, j - i + kl] / pivot
            if factor != 0.0:
                W[i, j - i + kl] = 0.0
                for col in range(j + 1, top + 1):
                    W[i, col - i + kl] -= factor * W[j, col - j + kl]
                b[i] -= factor * b[j]

    for i in range(n - 1, -1, -1):
        acc = b[i]
        for col in range(i + 1, min(n, i + kl + ku + 1)):
            acc -= W[i, col - i + kl] * b[col]
        b[i] = acc / W[i, kl]
    return -1, 0.0


@numba.njit(cache=True)
def _solve(ab, rhs, kl, ku, tol):
    n = rhs.size
    W = np.zeros((n, 2 * kl + ku + 1))
    for j in range(n):
        for i in range(max(0, j - ku), min(n, j + kl + 1)):
            W[i, j - i + kl] = ab[ku + i - j, j]
    b = rhs.copy()
    row, pivot = _eliminate(W, b, kl, ku, tol)
    return b, row, pivot


@numba.njit(cache=True)
def _dirichlet_solve(W, b, alpha, beta, tol):
    n = b.size
    for row, value in ((0, alpha), (n - 1, beta)):
        for c in range(7):
            W[row, c] = 0.0
        W[row, 2] = 1.0
        b[row] = value
    row, pivot = _eliminate(W, b, 2, 2, tol)
    return b, row, pivot


@numba.njit(cache=True)
def _table_solve(H, Gv, stiff, exps, upper, mass, load, alpha, beta, tol):
    n_el = H.shape[1]
    n = 2 * n_el + 1
    W = np.zeros((n, 7))
    b = np.zeros(n)
    n_mono = exps.shape[0]
    mono = np.empty(n_mono)
    pw = np.empty((3, 4))
    K = np.empty((3, 3))
    for e in range(n_el):
        for s in range(3):
            h = H[s, e]
            pw[s, 0] = 1.0
            pw[s, 1] = h
            pw[s, 2] = h * h
            pw[s, 3] = h * h * h
        for m in range(n_mono):
            mono[m] = pw[0, exps[m, 0]] * pw[1, exps[m, 1]] * pw[2, exps[m, 2]]
        for k in range(upper.shape[0]):
            acc = 0.0
            for m in range(n_mono):
                acc += stiff[k, m] * mono[m]
            K[upper[k, 0], upper[k, 1]] = acc
            K[upper[k, 1], upper[k, 0]] = acc
        base = 2 * e
        for a in range(3):
            r = 0.0
            for s in range(3):
                r += load[a, s] * Gv[s, e]
            b[base + a] += r
            for c in range(3):
                p = 0.0
                for s in range(3):
                    p += mass[a, c, s] * H[s, e]
                W[base + a, c - a + 2] += K[a, c] + p
    return _dirichlet_solve(W, b, alpha, beta, tol)


def banded_solve(ab: np.ndarray, rhs: np.ndarray, kl: int, ku: int, tol: float):
    """Solve ``A x = rhs`` for ``A`` in LAPACK band storage.

    ``ab[ku + i - j, j]`` holds ``A[i, j]``. Returns ``(x, row, pivot)``;
    ``row`` is -1 on success, otherwise the first row whose pivot fell
    below ``tol`` times the largest entry.
    """
    ab = np.ascontiguousarray(ab, dtype=np.float64)
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    return _solve(ab, rhs, int(kl), int(ku), float(tol))


def table_solve(H, Gv, stiff, exps, upper, mass, load, alpha, beta, tol):
    """Build element blocks from polynomial tables, assemble and solve.

    ``H`` and ``Gv`` are ``(3, n_el)`` left/mid/right depths and G values.
    Element stiffness entry ``upper[k]`` is ``sum_m stiff[k, m] * prod_s
    H[s]**exps[m, s]``, mass entry ``(a, c)`` is ``mass[a, c] . H`` and the
    load is ``load @ Gv``; all tables must already include their scaling.
    """
    f = np.ascontiguousarray
    return _table_solve(
        f(H, dtype=np.float64), f(Gv, dtype=np.float64),
        f(stiff, dtype=np.float64), f(exps, dtype=np.int64), f(upper, dtype=np.int64),
        f(mass, dtype=np.float64), f(load, dtype=np.float64),
        float(alpha), float(beta), float(tol),
    )
