"""Coefficient matrices of the coupled fluid/vacuum symmetric systems.

Every builder fills mirrored entries from the same float expression, so the
returned arrays are bitwise symmetric by construction.  Builders broadcast
over a trailing batch: state components of shape (*B,) / (3, *B) produce
matrices of shape (*B, n, n), ready for numpy's batched linear algebra.

Fluid component order: (q, v1, v2, v3, H1, H2, H3, S).
Vacuum component order: (h1, h2, h3, E1, E2, E3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .geometry import LiftDerivatives
from .state import EosModel, FluidState, NonHyperbolicState, check_hyperbolicity

# cross-product generators: CROSS[j] @ x == e_j x x; also the b_j blocks of
# the vacuum system
CROSS = np.zeros((3, 3, 3))
CROSS[0, 1, 2], CROSS[0, 2, 1] = -1.0, 1.0
CROSS[1, 0, 2], CROSS[1, 2, 0] = 1.0, -1.0
CROSS[2, 0, 1], CROSS[2, 1, 0] = -1.0, 1.0


def _bat(comp):
    """Move the leading 3-axis of a vector field to the back: (3,*B) -> (*B,3)."""
    return np.moveaxis(np.asarray(comp, dtype=float), 0, -1)


def build_A0(U: FluidState, eos: EosModel):
    """Fluid symmetrizer A0(U); symmetric positive definite iff p > 0."""
    if not check_hyperbolicity(U, eos):
        raise NonHyperbolicState("build_A0: state has nonpositive derived pressure")
    p = U.pressure()
    ra2 = eos.gamma * p  # rho * a^2 for the polytropic law
    H = _bat(U.H)
    rho = eos.rho(p, U.S)
    shape = p.shape
    A = np.zeros(shape + (8, 8))
    A[..., 0, 0] = 1.0 / ra2
    cpl = -H / ra2[..., None]
    A[..., 0, 4:7] = cpl
    A[..., 4:7, 0] = cpl
    for k in range(3):
        A[..., 1 + k, 1 + k] = rho
        A[..., 4 + k, 4 + k] = 1.0
    A[..., 4:7, 4:7] += H[..., :, None] * H[..., None, :] / ra2[..., None, None]
    A[..., 7, 7] = 1.0
    return A


def build_Ai(U: FluidState, eos: EosModel, i: int):
    """Fluid flux matrix A_i(U) for axis i in {1,2,3}; symmetric."""
    if i not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    if not check_hyperbolicity(U, eos):
        raise NonHyperbolicState("build_Ai: state has nonpositive derived pressure")
    vi = np.asarray(U.v[i - 1], dtype=float)
    A = vi[..., None, None] * build_A0(U, eos)
    Hi = np.asarray(U.H[i - 1], dtype=float)
    A[..., 0, i] += 1.0
    A[..., i, 0] += 1.0
    for k in range(3):
        A[..., 1 + k, 4 + k] -= Hi
        A[..., 4 + k, 1 + k] -= Hi
    return A


def build_Bj(j: int):
    """Constant vacuum flux matrix B_j = [[0, b_j], [b_j^T, 0]]."""
    if j not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    B = np.zeros((6, 6))
    B[0:3, 3:6] = CROSS[j - 1]
    B[3:6, 0:3] = CROSS[j - 1].T
    return B


def build_boundary_fluid(U: FluidState, lift: LiftDerivatives, eos: EosModel | None = None):
    """Lifted normal-flux matrix A~1 = (A1 - dtPhi A0 - d2Phi A2 - d3Phi A3)/d1Phi."""
    if eos is None:
        eos = EosModel()
    d1 = np.asarray(lift.d1_Phi, dtype=float)
    if np.any(d1 <= 0.0):
        raise ValueError("degenerate lift: d1 Phi must be positive")
    A = (
        build_Ai(U, eos, 1)
        - np.asarray(lift.dt_Phi)[..., None, None] * build_A0(U, eos)
        - np.asarray(lift.d2_Phi)[..., None, None] * build_Ai(U, eos, 2)
        - np.asarray(lift.d3_Phi)[..., None, None] * build_Ai(U, eos, 3)
    )
    return A / d1[..., None, None]


def build_boundary_maxwell(dt_phi, d2_phi, d3_phi, eps):
    """Boundary matrix B(phi) of the plain vacuum system and its closed-form spectrum.

    B = B1 - eps*dt_phi*I - d2_phi*B2 - d3_phi*B3 on the interface plane; the
    eigenvalues are -eps*dt_phi -+ sqrt(1 + |grad' phi|^2) (double each) and
    -eps*dt_phi (double).
    """
    dt_phi = np.asarray(dt_phi, dtype=float)
    d2_phi = np.asarray(d2_phi, dtype=float)
    d3_phi = np.asarray(d3_phi, dtype=float)
    shape = np.broadcast_shapes(dt_phi.shape, d2_phi.shape, d3_phi.shape)
    B = np.zeros(shape + (6, 6))
    B += build_Bj(1)
    B -= d2_phi[..., None, None] * build_Bj(2)
    B -= d3_phi[..., None, None] * build_Bj(3)
    mu = eps * dt_phi
    for k in range(6):
        B[..., k, k] -= mu
    r = np.sqrt(1.0 + d2_phi**2 + d3_phi**2)
    eigs = np.stack([-mu - r, -mu - r, -mu + 0 * r, -mu + 0 * r, -mu + r, -mu + r], axis=-1)
    return B, eigs


def build_secondary_symmetrizer(nu, j: int):
    """Secondary-symmetrization matrix of the vacuum system for j in 0..3.

    j = 0 gives the symmetrizer itself (positive definite iff |nu| < 1); the
    diagonal blocks of the flux matrices are M_j = nu e_j^T + e_j nu^T - nu_j I.
    """
    if j not in (0, 1, 2, 3):
        raise ValueError("index must be 0, 1, 2 or 3")
    nu = _bat(np.asarray(nu, dtype=float))
    shape = nu.shape[:-1]
    B = np.zeros(shape + (6, 6))
    if j == 0:
        for k in range(6):
            B[..., k, k] = 1.0
        C = np.einsum("jkl,...j->...kl", CROSS, nu)  # C @ x = nu x x
        B[..., 0:3, 3:6] = -C
        B[..., 3:6, 0:3] = np.swapaxes(-C, -1, -2)
        return B
    e = np.zeros(3)
    e[j - 1] = 1.0
    M = nu[..., :, None] * e[None, :] + e[:, None] * nu[..., None, :]
    nj = nu[..., j - 1]
    for a in range(3):
        M[..., a, a] -= nj
    B[..., 0:3, 0:3] = M
    B[..., 3:6, 3:6] = M
    B[..., 0:3, 3:6] = CROSS[j - 1]
    B[..., 3:6, 0:3] = CROSS[j - 1].T
    return B


def build_secondary_boundary(v_minus, lift: LiftDerivatives, eps: float):
    """Lifted boundary matrix of the secondary-symmetrized vacuum system.

    Equals (B1(nu) - eps*dtPhi*B0(nu) - d2Phi*B2(nu) - d3Phi*B3(nu)) / d1Phi
    with nu = eps * v_minus.
    """
    d1 = np.asarray(lift.d1_Phi, dtype=float)
    if np.any(d1 <= 0.0):
        raise ValueError("degenerate lift: d1 Phi must be positive")
    nu = eps * np.asarray(v_minus, dtype=float)
    B = (
        build_secondary_symmetrizer(nu, 1)
        - (eps * np.asarray(lift.dt_Phi))[..., None, None]
        * build_secondary_symmetrizer(nu, 0)
        - np.asarray(lift.d2_Phi)[..., None, None] * build_secondary_symmetrizer(nu, 2)
        - np.asarray(lift.d3_Phi)[..., None, None] * build_secondary_symmetrizer(nu, 3)
    )
    return B / d1[..., None, None]


@dataclass(frozen=True)
class Inertia:
    """Eigenvalue signature (counts below, within, above +-zero_tol)."""

    n_neg: int
    n_zero: int
    n_pos: int
    zero_tol: float

    def as_tuple(self):
        return (self.n_neg, self.n_zero, self.n_pos)


def inertia(M, zero_tol=None) -> Inertia:
    """Signature of a symmetric matrix; zero_tol defaults to 1e-8 * spectral radius."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("inertia expects a square matrix")
    scale = np.max(np.abs(M)) if M.size else 0.0
    if np.max(np.abs(M - M.T)) > 1e-12 * max(scale, 1.0):
        raise ValueError("inertia expects a symmetric matrix")
    eigs = np.linalg.eigvalsh(M)
    if zero_tol is None:
        zero_tol = 1e-8 * max(np.max(np.abs(eigs)), np.finfo(float).tiny)
    n_neg = int(np.sum(eigs < -zero_tol))
    n_pos = int(np.sum(eigs > zero_tol))
    return Inertia(n_neg, len(eigs) - n_neg - n_pos, n_pos, zero_tol)


def characteristic_basis(Aboundary, A0):
    """Generalized eigendecomposition of the pencil (A_boundary, A0).

    Returns (speeds, Y) with A_boundary Y = A0 Y diag(speeds) and Y^T A0 Y = I,
    so characteristic amplitudes of a state u are Y^T A0 u.  Ascending order.
    """
    speeds, Y = scipy.linalg.eigh(Aboundary, A0)
    return speeds, Y


def dump_matrix_csv(M, path):
    """Debug dump: row-major CSV with 17 significant digits."""
    np.savetxt(path, np.asarray(M, dtype=float), fmt="%.17g", delimiter=",")
