"""Interface geometry: cut-off, change of variables, normals, curvature.

The front phi(t, x') lives on the periodic tangential grid.  The change of
variables to fixed half-spaces is Phi(t, x) = x1 + chi(x1) * phi(t, x') with a
C-infinity cut-off chi.  The published conditions on chi (support in (-1,1),
chi = 1 near 0, |chi'| < 1/2) are mutually inconsistent, so this module keeps
the support and the plateau [-1/4, 1/4], builds a flattened transition with
|chi'| <= 16/9 < 2, and the admissibility bound |phi| <= PHI_MAX = 1/4 then
guarantees d1 Phi >= 1/2 everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fd import d_periodic
from .state import GridSpec

PHI_MAX = 0.25

# Gauss-Legendre panels used for the cumulative integrals of the transition.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)
_N_PANELS = 24


class DegenerateLift(ValueError):
    """Front amplitude too large for a non-degenerate change of variables."""


def _bump_step(u):
    """Basic C-infinity step f(u)/(f(u)+f(1-u)), f(t)=exp(-1/t) for t>0."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        fu = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        fv = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return fu / (fu + fv)


_DELTA = 0.25  # shoulder width of the smoothed-box weight


def _box_weight(s):
    """C-infinity plateau weight on [0,1]: 1 on [delta, 1-delta], 0 at the ends."""
    s = np.asarray(s, dtype=float)
    return _bump_step(s / _DELTA) * _bump_step((1.0 - s) / _DELTA)


def _cumulative_box(t):
    """Integral of _box_weight from 0 to t by composite Gauss-Legendre."""
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, 1.0)
    edges = np.linspace(0.0, 1.0, _N_PANELS + 1)
    total = np.zeros(tc.shape)
    for a, b in zip(edges[:-1], edges[1:]):
        hi = np.minimum(tc, b)
        half = np.maximum(hi - a, 0.0) / 2.0
        mid = a + half
        # nodes land in [a, hi]; panels fully to the right contribute 0
        nodes = mid[..., None] + half[..., None] * _GL_NODES
        total = total + half * np.dot(_box_weight(nodes), _GL_WEIGHTS)
    return total


_BOX_TOTAL = float(_cumulative_box(np.array(1.0)))


def smooth_transition(t):
    """Monotone C-infinity step on [0,1] with max slope 1/(1-delta) = 4/3.

    Built as the normalized cumulative integral of a smoothed-box weight, so
    it is considerably flatter than the basic exp-step (max slope 2).
    """
    return _cumulative_box(t) / _BOX_TOTAL


def smooth_transition_deriv(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    return np.where(inside, _box_weight(np.clip(t, 0.0, 1.0)) / _BOX_TOTAL, 0.0)


def cutoff_chi(x1):
    """Cut-off chi and its derivative: chi = 1 on [-1/4,1/4], supp in (-1,1)."""
    x1 = np.asarray(x1, dtype=float)
    r = np.abs(x1)
    u = (r - 0.25) / 0.75
    chi = np.where(r <= 0.25, 1.0, np.where(r >= 1.0, 0.0, 1.0 - smooth_transition(u)))
    dchi = np.where(
        (r > 0.25) & (r < 1.0),
        -np.sign(x1) * smooth_transition_deriv(u) / 0.75,
        0.0,
    )
    return chi, dchi


def sigma_weight(x1):
    """Conormal weight: sigma = x1 for x1 <= 1/2, sigma = 1 for x1 >= 3/2.

    sigma' = 1 - smooth_transition((x1 - 1/2)) >= 0, so sigma is monotone; the
    plateaus are exact because the transition integrates to 1/2 by symmetry.
    """
    x1 = np.asarray(x1, dtype=float)
    u = x1 - 0.5
    ramp = u - _cumulative_segment(u)
    sig = np.where(x1 <= 0.5, x1, np.where(x1 >= 1.5, 1.0, 0.5 + ramp))
    dsig = np.where(
        x1 <= 0.5, 1.0, np.where(x1 >= 1.5, 0.0, 1.0 - smooth_transition(u))
    )
    return sig, dsig


def _cumulative_segment(u):
    """Integral of smooth_transition from 0 to u (u in [0,1])."""
    u = np.asarray(u, dtype=float)
    uc = np.clip(u, 0.0, 1.0)
    edges = np.linspace(0.0, 1.0, _N_PANELS + 1)
    total = np.zeros(uc.shape)
    for a, b in zip(edges[:-1], edges[1:]):
        hi = np.minimum(uc, b)
        half = np.maximum(hi - a, 0.0) / 2.0
        mid = a + half
        nodes = mid[..., None] + half[..., None] * _GL_NODES
        total = total + half * np.dot(smooth_transition(nodes), _GL_WEIGHTS)
    return total


@dataclass
class InterfaceField:
    """Front phi and its time derivative on the tangential grid."""

    phi: np.ndarray
    dt_phi: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        self.dt_phi = np.asarray(self.dt_phi, dtype=float)

    @staticmethod
    def zero(grid: GridSpec):
        shape = (grid.nx2, grid.nx3)
        return InterfaceField(np.zeros(shape), np.zeros(shape), grid)

    def grad(self):
        """Tangential gradient (d2 phi, d3 phi), 2nd-order periodic."""
        return (
            d_periodic(self.phi, self.grid.h2, 0),
            d_periodic(self.phi, self.grid.h3, 1),
        )


@dataclass
class LiftDerivatives:
    """Derivatives of Phi = x1 + chi(x1) phi(t,x') on one 3-D half-space grid."""

    dt_Phi: np.ndarray
    d1_Phi: np.ndarray
    d2_Phi: np.ndarray
    d3_Phi: np.ndarray

    @staticmethod
    def identity(shape):
        z = np.zeros(shape)
        return LiftDerivatives(z, np.ones(shape), z.copy(), z.copy())


def lift_Phi(phi_if: InterfaceField, grid: GridSpec, side: str) -> LiftDerivatives:
    """Lift the front to the half-space grid of the given side ('+' or '-').

    d1 Phi = 1 + chi'(x1) phi >= 1/2 for admissible fronts; a violation of the
    amplitude bound raises DegenerateLift naming the offending point.
    """
    amax = float(np.max(np.abs(phi_if.phi))) if phi_if.phi.size else 0.0
    if amax > PHI_MAX:
        idx = tuple(
            int(i) for i in np.unravel_index(np.argmax(np.abs(phi_if.phi)), phi_if.phi.shape)
        )
        raise DegenerateLift(
            f"front amplitude {amax:.6g} exceeds {PHI_MAX} at tangential index {idx}"
        )
    x1 = grid.x1_plus() if side == "+" else grid.x1_minus()
    chi, dchi = cutoff_chi(x1)
    chi = chi[:, None, None]
    dchi = dchi[:, None, None]
    phi = phi_if.phi[None, :, :]
    g2, g3 = phi_if.grad()
    return LiftDerivatives(
        dt_Phi=chi * phi_if.dt_phi[None],
        d1_Phi=1.0 + dchi * phi,
        d2_Phi=chi * g2[None],
        d3_Phi=chi * g3[None],
    )


def normal_tangents(d2_phi, d3_phi):
    """N = (1, -d2 phi, -d3 phi), tau2 = (d2 phi, 1, 0), tau3 = (d3 phi, 0, 1)."""
    d2_phi = np.asarray(d2_phi, dtype=float)
    one = np.ones_like(d2_phi)
    zero = np.zeros_like(d2_phi)
    N = np.stack([one, -d2_phi, -d3_phi])
    tau2 = np.stack([d2_phi, one, zero])
    tau3 = np.stack([d3_phi, zero, one])
    return N, tau2, tau3


def mean_curvature(phi_if: InterfaceField):
    """Twice the mean curvature: div'( grad' phi / sqrt(1 + |grad' phi|^2) )."""
    g2, g3 = phi_if.grad()
    w = 1.0 / np.sqrt(1.0 + g2 * g2 + g3 * g3)
    h2, h3 = phi_if.grid.h2, phi_if.grid.h3
    return d_periodic(w * g2, h2, 0) + d_periodic(w * g3, h3, 1)


@dataclass
class CurvatureMatrix:
    """Symmetric positive definite 2x2 field B = I/|N| - g (x) g / |N|^3."""

    b22: np.ndarray
    b23: np.ndarray
    b33: np.ndarray

    def apply(self, w2, w3):
        return self.b22 * w2 + self.b23 * w3, self.b23 * w2 + self.b33 * w3


def curvature_matrix(phi_ring: InterfaceField) -> CurvatureMatrix:
    g2, g3 = phi_ring.grad()
    nrm = np.sqrt(1.0 + g2 * g2 + g3 * g3)
    inv3 = 1.0 / nrm**3
    return CurvatureMatrix(
        b22=1.0 / nrm - g2 * g2 * inv3,
        b23=-g2 * g3 * inv3,
        b33=1.0 / nrm - g3 * g3 * inv3,
    )


def linearized_curvature(phi, phi_ring: InterfaceField):
    """div'(B grad' phi) in symmetric flux form.

    Uses the same centered operators for gradient and divergence, so discrete
    summation by parts <div'(B grad u), w> = -<B grad u, grad w> holds exactly
    on the periodic grid and the operator is self-adjoint.
    """
    grid = phi_ring.grid
    B = curvature_matrix(phi_ring)
    g2 = d_periodic(phi, grid.h2, 0)
    g3 = d_periodic(phi, grid.h3, 1)
    w2, w3 = B.apply(g2, g3)
    return d_periodic(w2, grid.h2, 0) + d_periodic(w3, grid.h3, 1)
