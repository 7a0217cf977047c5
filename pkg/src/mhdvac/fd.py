"""Finite-difference stencils on the half-space grids.

Tangential axes are periodic (2nd-order centered).  The normal axis is a
bounded node grid; interior points use centered differences and the two edge
nodes use 2nd-order one-sided stencils, so traces never need ghost data.
"""

from __future__ import annotations

import numpy as np


def d_periodic(u, h, axis):
    """Centered difference on a periodic axis."""
    return (np.roll(u, -1, axis=axis) - np.roll(u, 1, axis=axis)) / (2.0 * h)


def d_normal(u, h, axis):
    """Centered interior, 2nd-order one-sided at both edge nodes."""
    du = np.empty_like(u)
    lo = [slice(None)] * u.ndim

    def sl(i):
        s = list(lo)
        s[axis] = i
        return tuple(s)

    inner = list(lo)
    inner[axis] = slice(1, -1)
    up = list(lo)
    up[axis] = slice(2, None)
    down = list(lo)
    down[axis] = slice(None, -2)
    du[tuple(inner)] = (u[tuple(up)] - u[tuple(down)]) / (2.0 * h)
    # difference form so constants are annihilated exactly
    du[sl(0)] = (4.0 * (u[sl(1)] - u[sl(0)]) - (u[sl(2)] - u[sl(0)])) / (2.0 * h)
    du[sl(-1)] = (4.0 * (u[sl(-1)] - u[sl(-2)]) - (u[sl(-1)] - u[sl(-3)])) / (2.0 * h)
    return du


def d_normal_matrix(n, h):
    """Dense matrix of d_normal on n nodes (used by the mode analyzer)."""
    D = np.zeros((n, n))
    for j in range(1, n - 1):
        D[j, j - 1] = -1.0 / (2.0 * h)
        D[j, j + 1] = 1.0 / (2.0 * h)
    D[0, 0], D[0, 1], D[0, 2] = -3.0 / (2 * h), 4.0 / (2 * h), -1.0 / (2 * h)
    D[-1, -1], D[-1, -2], D[-1, -3] = 3.0 / (2 * h), -4.0 / (2 * h), 1.0 / (2 * h)
    return D


def trapezoid_weights(n, h):
    """Trapezoid quadrature weights on n nodes with spacing h."""
    w = np.full(n, h)
    w[0] = 0.5 * h
    w[-1] = 0.5 * h
    return w
