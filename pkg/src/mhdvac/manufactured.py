"""Manufactured exact solutions for convergence studies.

Each perturbation component is a separable trig profile with a cubic time
ramp (zero value, slope and curvature at t = 0, so the zero-initial-data
condition holds).  Sources are produced by feeding the analytic fields and
their analytic derivatives through the same operator actions the solver uses;
the only cross-talk left is the spatial discretization error, so the L2 error
of the computed solution measures the scheme's order directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    BasicState,
    Perturbation,
    RingWorkspace,
    a0_apply,
    b0_apply,
    coeff_C_minus,
    coeff_C_plus,
    ai_apply,
    atilde1_apply,
    bj_apply,
    btilde1_apply,
    linearized_boundary,
    reflect,
)
from .solver import Sources


def _ramp(t, tau=1.0):
    s = t / tau
    return s**3, 3.0 * s**2 / tau


@dataclass
class _Mode:
    amp: float
    k1: float
    k2: float
    k3: float
    p1: float
    p2: float
    p3: float
    L1: float = 0.0  # nonzero: apply an envelope vanishing at |x1| = L1

    def eval(self, x1, x2, x3):
        c1 = np.cos(self.k1 * x1 + self.p1)
        s1 = np.sin(self.k1 * x1 + self.p1)
        c2 = np.cos(self.k2 * x2 + self.p2)
        c3 = np.cos(self.k3 * x3 + self.p3)
        if self.L1 > 0.0:
            # (1 - r^2)^4 vanishes with three derivatives at the outer face, so
            # the absorbing closure sees (numerically) no incoming content
            r = x1 / self.L1
            b = (1.0 - r * r) ** 4
            db = -8.0 * r * (1.0 - r * r) ** 3 / self.L1
        else:
            b, db = 1.0, 0.0
        val = self.amp * b * c1 * c2 * c3
        d1 = self.amp * (db * c1 - b * self.k1 * s1) * c2 * c3
        d2 = -self.amp * self.k2 * b * c1 * np.sin(self.k2 * x2 + self.p2) * c3
        d3 = -self.amp * self.k3 * b * c1 * c2 * np.sin(self.k3 * x3 + self.p3)
        return val, d1, d2, d3


class ManufacturedCase:
    """Exact fields, their rates, and the matching sources on a given ring."""

    def __init__(self, ring: BasicState, seed=0, tau=1.0, amp=1.0):
        self.ring = ring
        self.ws = RingWorkspace.build(ring)
        self.tau = tau
        grid = ring.grid
        rng = np.random.default_rng(seed)
        k2 = 2 * np.pi / grid.L2
        k3 = 2 * np.pi / grid.L3

        def modes(n):
            return [
                _Mode(
                    amp=amp * float(rng.uniform(0.5, 1.0)),
                    k1=np.pi / grid.L1,
                    k2=k2,
                    k3=k3,
                    p1=float(rng.uniform(0, 2 * np.pi)),
                    p2=float(rng.uniform(0, 2 * np.pi)),
                    p3=float(rng.uniform(0, 2 * np.pi)),
                    L1=grid.L1,
                )
                for _ in range(n)
            ]

        self.modes_u = modes(8)
        self.modes_v = modes(6)
        self.mode_phi = _Mode(
            amp=0.05 * amp,
            k1=0.0,
            k2=k2,
            k3=k3,
            p1=0.0,
            p2=float(rng.uniform(0, 2 * np.pi)),
            p3=float(rng.uniform(0, 2 * np.pi)),
        )
        X1p = grid.x1_plus()[:, None, None]
        X1m = grid.x1_minus()[:, None, None]
        X2 = grid.x2()[None, :, None]
        X3 = grid.x3()[None, None, :]
        self._u_parts = [m.eval(X1p, X2, X3) for m in self.modes_u]
        self._v_parts = [m.eval(X1m, X2, X3) for m in self.modes_v]
        X2g = grid.x2()[:, None]
        X3g = grid.x3()[None, :]
        self._phi_parts = self.mode_phi.eval(0.0, X2g, X3g)

    def exact(self, t):
        g, _ = _ramp(t, self.tau)
        udot = np.stack([g * p[0] for p in self._u_parts])
        vdot = np.stack([g * p[0] for p in self._v_parts])
        phi = g * self._phi_parts[0]
        return Perturbation(udot=udot, vdot=vdot, phi=phi)

    def rate(self, t):
        _, dg = _ramp(t, self.tau)
        udot = np.stack([dg * p[0] for p in self._u_parts])
        vdot = np.stack([dg * p[0] for p in self._v_parts])
        phi = dg * self._phi_parts[0]
        return Perturbation(udot=udot, vdot=vdot, phi=phi)

    def _fluid_source(self, t):
        ws = self.ws
        g, dg = _ramp(t, self.tau)
        val = np.stack([p[0] for p in self._u_parts])
        d1 = np.stack([p[1] for p in self._u_parts])
        d2 = np.stack([p[2] for p in self._u_parts])
        d3 = np.stack([p[3] for p in self._u_parts])
        c = ws.coeffs
        out = dg * a0_apply(c, val)
        out += g * atilde1_apply(c, ws.lift_plus, d1)
        out += g * ai_apply(c, 2, d2)
        out += g * ai_apply(c, 3, d3)
        out += g * coeff_C_plus(ws, val)
        return out

    def _vacuum_source(self, t):
        ws = self.ws
        eps = self.ring.params.epsilon
        g, dg = _ramp(t, self.tau)
        val = np.stack([p[0] for p in self._v_parts])
        d1 = np.stack([p[1] for p in self._v_parts])
        d2 = np.stack([p[2] for p in self._v_parts])
        d3 = np.stack([p[3] for p in self._v_parts])
        out = (eps * dg) * b0_apply(ws.nu, val)
        out += g * btilde1_apply(ws.nu, eps, ws.lift_minus, d1)
        out += g * bj_apply(2, ws.nu, d2)
        out += g * bj_apply(3, ws.nu, d3)
        uval = np.stack([p[0] for p in self._u_parts])
        out += g * coeff_C_minus(ws, reflect(uval[1:4]))
        return out

    def _boundary_source(self, t):
        pert = self.exact(t)
        dtphi = self.rate(t).phi
        return linearized_boundary(pert, dtphi, self.ws)

    def sources(self) -> Sources:
        return Sources(
            f=self._fluid_source,
            g_vac=self._vacuum_source,
            g_bnd=self._boundary_source,
        )

    def errors(self, state: Perturbation, t):
        """L2 errors of (Udot, Vdot, phi) against the exact fields at time t."""
        from .diagnostics import space_weights

        ex = self.exact(t)
        w = space_weights(self.ring.grid)
        wg = self.ring.grid.h2 * self.ring.grid.h3
        eu = np.sqrt(np.sum((state.udot - ex.udot) ** 2 * w))
        ev = np.sqrt(np.sum((state.vdot - ex.vdot) ** 2 * w))
        ep = np.sqrt(np.sum((state.phi - ex.phi) ** 2) * wg)
        return float(eu), float(ev), float(ep)
