"""Frozen-coefficient normal-mode growth analysis.

For a constant background with a flat front, a single tangential Fourier mode
exp(i(k2 x2 + k3 x3)) reduces the coupled problem to a 1-D system in x1 on
[0, L1] (fluid) and [-L1, 0] (vacuum) plus the scalar front amplitude.  The
semi-discrete generator, including the characteristic interface closure with
the -s|k'|^2 curvature symbol and absorbing outer faces, is assembled by
probing; its rightmost spectrum measures the temporal growth rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fd import d_normal_matrix
from .matrices import (
    build_A0,
    build_Ai,
    build_secondary_boundary,
    build_secondary_symmetrizer,
    characteristic_basis,
)
from .geometry import LiftDerivatives
from .operators import FluidCoeffs, a0_solve, ai_apply, b0_solve, bj_apply, btilde1_apply
from .state import EosModel, FluidState, NonHyperbolicState


@dataclass
class ModeSpec:
    """Constant-coefficient background and one tangential wavevector."""

    k2: float
    k3: float
    q0: float = 1.0
    v: tuple = (0.0, 0.0, 0.0)
    H: tuple = (0.0, 0.0, 0.0)
    h: tuple = (0.0, 0.0, 0.0)
    E: tuple = (0.0, 0.0, 0.0)
    S: float = 0.0
    epsilon: float = 0.1
    s_tension: float = 0.0
    eos: EosModel = field(default_factory=EosModel)

    def fluid_state(self):
        return FluidState.constant(q=self.q0, v=self.v, H=self.H, S=self.S)

    def validate(self):
        if self.v[0] != 0.0 or self.H[0] != 0.0 or self.h[0] != 0.0:
            raise ValueError("flat-front background needs v1 = H1 = h1 = 0")
        if self.E[1] != 0.0 or self.E[2] != 0.0:
            raise ValueError("flat-front background needs tangential E = 0")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        U = self.fluid_state()
        if U.pressure() <= 0:
            raise NonHyperbolicState("mode background loses hyperbolicity")
        return self


class _ModeOperator:
    """Semi-discrete right-hand side for one Fourier mode, complex arithmetic."""

    def __init__(self, spec: ModeSpec, n1: int, L1: float):
        spec.validate()
        self.spec = spec
        self.n = n1 + 1
        self.L1 = L1
        h1 = L1 / n1
        self.D1 = d_normal_matrix(self.n, h1)
        U = spec.fluid_state()
        # coefficients with a singleton trailing axis broadcast over the nodes
        self.c = FluidCoeffs.at(FluidState.constant(q=spec.q0, v=spec.v, H=spec.H, S=spec.S, shape=(1,)), spec.eos)
        self.nu = spec.epsilon * np.asarray(spec.v)[:, None]
        self.eps = spec.epsilon
        self.ik2 = 1j * spec.k2
        self.ik3 = 1j * spec.k3
        ident = LiftDerivatives.identity(())

        A0 = build_A0(U, spec.eos)
        A1 = build_Ai(U, spec.eos, 1)
        sp, Y = characteristic_basis(A1, A0)
        tol = 1e-8 * max(np.max(np.abs(sp)), 1e-30)
        if np.sum(sp > tol) != 1:
            raise ValueError("fluid boundary matrix does not have one incoming mode")
        self.yf = Y[:, sp > tol][:, 0]
        self.Pf_out = np.eye(8) - Y[:, sp < -tol] @ (Y[:, sp < -tol].T @ A0)

        varr = np.asarray(spec.v)
        B1 = build_secondary_boundary(varr, ident, spec.epsilon)
        eB0 = spec.epsilon * build_secondary_symmetrizer(spec.epsilon * varr, 0)
        sp, Y = characteristic_basis(B1, eB0)
        tol = 1e-8 * max(np.max(np.abs(sp)), 1e-30)
        if np.sum(sp < -tol) != 2:
            raise ValueError("vacuum boundary matrix does not have two incoming modes")
        self.yv = Y[:, sp < -tol]
        self.Pv_out = np.eye(6) - Y[:, sp > tol] @ (Y[:, sp > tol].T @ eB0)

        hb = np.asarray(spec.h)
        Eb = np.asarray(spec.E)
        vb = varr
        # 3x3 interface solve, columns (alpha, beta1, beta2); rows 2..4 with
        # dt(phi) eliminated through the kinematic row
        M = np.zeros((3, 3), dtype=complex)
        yf_v1 = self.yf[1]
        M[0, 0] = -self.eps * hb[2] * yf_v1
        M[1, 0] = self.eps * hb[1] * yf_v1
        M[2, 0] = self.yf[0]
        for b in range(2):
            yh = self.yv[0:3, b]
            yE = self.yv[3:6, b]
            M[0, 1 + b] = yE[1]
            M[1, 1 + b] = yE[2]
            M[2, 1 + b] = -hb @ yh + Eb @ yE
        self.Minv = np.linalg.pinv(M)
        self.hb, self.Eb, self.vb = hb, Eb, vb
        self.curv_symbol = -(spec.k2**2 + spec.k3**2)

    @property
    def dim(self):
        return 14 * self.n + 1

    def split(self, z):
        n = self.n
        u = z[: 8 * n].reshape(8, n)
        w = z[8 * n : 14 * n].reshape(6, n)
        phi = z[-1]
        return u, w, phi

    def join(self, u, w, phi):
        return np.concatenate([u.ravel(), w.ravel(), [phi]])

    def dt_phi(self, u, phi):
        adv = self.vb[1] * self.ik2 + self.vb[2] * self.ik3
        return u[1, 0] - adv * phi

    def rows(self, u, w, phi):
        dtphi = self.dt_phi(u, phi)
        E = w[3:6, -1]
        h = w[0:3, -1]
        r2 = E[1] - self.eps * self.hb[2] * dtphi + self.Eb[0] * self.ik2 * phi
        r3 = E[2] + self.eps * self.hb[1] * dtphi + self.Eb[0] * self.ik3 * phi
        r4 = (
            u[0, 0]
            - self.hb @ h
            + self.Eb @ E
            - self.spec.s_tension * self.curv_symbol * phi
        )
        return np.array([r2, r3, r4])

    def project(self, z):
        u, w, phi = self.split(z)
        u = u.copy()
        w = w.copy()
        c = -self.Minv @ self.rows(u, w, phi)
        u[:, 0] = u[:, 0] + c[0] * self.yf
        w[:, -1] = w[:, -1] + self.yv @ c[1:]
        u[:, -1] = self.Pf_out @ u[:, -1]
        w[:, 0] = self.Pv_out @ w[:, 0]
        return self.join(u, w, phi)

    def apply_rhs(self, z):
        u, w, phi = self.split(z)
        du = u @ self.D1.T
        out = ai_apply(self.c, 1, du)
        out = out + self.ik2 * ai_apply(self.c, 2, u)
        out = out + self.ik3 * ai_apply(self.c, 3, u)
        rate_u = -a0_solve(self.c, out)

        dw = w @ self.D1.T
        ident = LiftDerivatives.identity(())
        vout = btilde1_apply(self.nu, self.eps, ident, dw)
        vout += self.ik2 * bj_apply(2, self.nu, w)
        vout += self.ik3 * bj_apply(3, self.nu, w)
        rate_w = -b0_solve(self.nu, vout) / self.eps
        return self.join(rate_u, rate_w, self.dt_phi(u, phi))

    def generator(self):
        """Dense matrix of z -> project(rhs(project(z)))."""
        dim = self.dim
        G = np.zeros((dim, dim), dtype=complex)
        basis = np.zeros(dim, dtype=complex)
        for j in range(dim):
            basis[:] = 0.0
            basis[j] = 1.0
            G[:, j] = self.project(self.apply_rhs(self.project(basis)))
        return G


def frozen_mode_growth(spec: ModeSpec, n1: int = 48, L1: float = 2.0):
    """Max real part of the semi-discrete generator's spectrum for one mode.

    Returns (growth_rate, spectrum) with the spectrum sorted by descending
    real part.
    """
    op = _ModeOperator(spec, n1, L1)
    G = op.generator()
    eigs = np.linalg.eigvals(G)
    order = np.argsort(-eigs.real)
    eigs = eigs[order]
    return float(eigs[0].real), eigs


def growth_scan(ks, base: ModeSpec, n1: int = 48, L1: float = 2.0):
    """Growth rate over a list of |k| values (applied along k2)."""
    out = []
    for k in ks:
        spec = ModeSpec(
            k2=float(k),
            k3=base.k3,
            q0=base.q0,
            v=base.v,
            H=base.H,
            h=base.h,
            E=base.E,
            S=base.S,
            epsilon=base.epsilon,
            s_tension=base.s_tension,
            eos=base.eos,
        )
        rate, _ = frozen_mode_growth(spec, n1=n1, L1=L1)
        out.append(rate)
    return np.array(out)
