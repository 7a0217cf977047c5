"""Explicit time integrator for the coupled linearized interface problem.

Method of lines: 2nd-order differences in space (one-sided at the normal
edges), 3-stage strong-stability-preserving Runge-Kutta in time.  The front
is advanced from the kinematic boundary row; the remaining three rows close
the incoming characteristics at the interface after every stage: per
tangential point the corrections along the single incoming fluid mode and the
two incoming vacuum modes solve a small linear system whose residual must
stay below a hard threshold.  Outgoing and tangential (zero-speed) modes are
never prescribed.  Outer boundaries absorb by zeroing incoming amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fd
from .diagnostics import RunAccumulator
from .geometry import LiftDerivatives, linearized_curvature, normal_tangents
from .matrices import (
    build_A0,
    build_boundary_fluid,
    build_secondary_boundary,
    build_secondary_symmetrizer,
    characteristic_basis,
)
from .operators import (
    BasicState,
    Perturbation,
    RingWorkspace,
    a0_solve,
    b0_solve,
    fluid_linear_terms,
    reflect,
    trace_minus,
    trace_plus,
    vacuum_linear_terms,
)
from .state import FluidState, GridSpec

CFL_MAX = 0.4


class UnstableRun(RuntimeError):
    """Raised when the fields blow past the instability guard."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class SolverConfig:
    grid: GridSpec
    t_end: float
    cfl: float = CFL_MAX
    bc_outer: str = "absorbing"
    scheme: str = "ssprk3"
    snap_every: int = 5
    bc_residual_tol: float = 1e-9
    abort_factor: float = 1e12

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError("tEnd must be positive")
        if not 0 < self.cfl <= CFL_MAX:
            raise ValueError(f"cfl must lie in (0, {CFL_MAX}]")
        if self.bc_outer != "absorbing":
            raise ValueError("only the absorbing outer closure is implemented")
        if self.scheme != "ssprk3":
            raise ValueError("only the ssprk3 integrator is implemented")


@dataclass
class Sources:
    """Optional right-hand sides: interior fluid f, vacuum g, boundary rows g_bnd."""

    f: object = None  # t -> (8, nx1+1, nx2, nx3)
    g_vac: object = None  # t -> (6, nx1+1, nx2, nx3)
    g_bnd: object = None  # t -> (4, nx2, nx3)

    def f_at(self, t, like):
        return np.zeros_like(like) if self.f is None else self.f(t)

    def g_vac_at(self, t, like):
        return None if self.g_vac is None else self.g_vac(t)

    def g_bnd_at(self, t, shape):
        return np.zeros((4,) + shape) if self.g_bnd is None else self.g_bnd(t)


def max_characteristic_speed(ring: BasicState):
    """Fastest signal speed on either side; the vacuum light speed 1/eps wins."""
    p = ring.U.pressure()
    rho = ring.eos.rho(p, ring.U.S)
    a2 = ring.eos.gamma * p / rho
    b2 = np.sum(ring.U.H * ring.U.H, axis=0) / rho
    vmax = np.sqrt(np.max(np.sum(ring.U.v * ring.U.v, axis=0)))
    fluid = vmax + np.sqrt(np.max(a2 + b2))
    return max(float(fluid), 1.0 / ring.params.epsilon)


class InterfaceClosure:
    """Per-point characteristic data and boundary-row solve at x1 = 0."""

    def __init__(self, ws: RingWorkspace, s_tension, residual_tol=1e-9):
        ring = ws.ring
        grid = ring.grid
        eps = ring.params.epsilon
        self.ws = ws
        self.grid = grid
        self.eps = eps
        self.s_tension = s_tension
        self.residual_tol = residual_tol

        lift_tr = LiftDerivatives(
            dt_Phi=trace_plus(ws.lift_plus.dt_Phi),
            d1_Phi=trace_plus(ws.lift_plus.d1_Phi),
            d2_Phi=trace_plus(ws.lift_plus.d2_Phi),
            d3_Phi=trace_plus(ws.lift_plus.d3_Phi),
        )
        U_tr = FluidState.from_vector(trace_plus(ring.U.as_vector()))
        A0 = build_A0(U_tr, ring.eos)
        At = build_boundary_fluid(U_tr, lift_tr, ring.eos)
        v_tr = trace_plus(ring.U.v)
        Bt = build_secondary_boundary(v_tr, lift_tr, eps)
        eB0 = eps * build_secondary_symmetrizer(eps * v_tr, 0)

        n2, n3 = grid.nx2, grid.nx3
        yf = np.zeros((n2, n3, 8))
        yv = np.zeros((n2, n3, 6, 2))
        for i2 in range(n2):
            for i3 in range(n3):
                sp, Y = characteristic_basis(At[i2, i3], A0[i2, i3])
                tol = 1e-8 * max(np.max(np.abs(sp)), 1e-30)
                inc = np.where(sp > tol)[0]
                zero = np.where(np.abs(sp) <= tol)[0]
                if len(inc) != 1 or len(zero) != 6:
                    raise UnstableRun(
                        "fluid boundary matrix lost its (1,6,1) signature at "
                        f"tangential index {(i2, i3)}"
                    )
                yf[i2, i3] = Y[:, inc[0]]
                sp, Y = characteristic_basis(Bt[i2, i3], eB0[i2, i3])
                tol = 1e-8 * max(np.max(np.abs(sp)), 1e-30)
                inc = np.where(sp < -tol)[0]
                zero = np.where(np.abs(sp) <= tol)[0]
                if len(inc) != 2 or len(zero) != 2:
                    raise UnstableRun(
                        "vacuum boundary matrix lost its (2,2,2) signature at "
                        f"tangential index {(i2, i3)}"
                    )
                yv[i2, i3] = Y[:, inc]
        self.yf = yf
        self.yv = yv

        # background traces entering the rows
        g2r, g3r = ring.phi.grad()
        self.Nring, self.tau2, self.tau3 = normal_tangents(g2r, g3r)
        self.h_tr = trace_minus(ring.V.h)
        self.E_tr = trace_minus(ring.V.E)
        self.v_tr = v_tr
        self.dtphi_r = ring.phi.dt_phi
        d1U = trace_plus(ws.dU["1"])
        d1V = trace_minus(ws.dV["1"])
        self.d1vN = d1U[1] - d1U[2] * g2r - d1U[3] * g3r
        self.jump = d1U[0] - _dot(self.h_tr, d1V[0:3]) + _dot(self.E_tr, d1V[3:6])
        self.d2E1 = trace_minus(fd.d_periodic(ring.V.E[0], grid.h2, 1))
        self.d3E1 = trace_minus(fd.d_periodic(ring.V.E[0], grid.h3, 2))

        # 3x3 row coefficients on the corrections (alpha, beta1, beta2)
        yf_vN = np.einsum("...k,k...->...", yf[..., 1:4], self.Nring)
        M = np.zeros((n2, n3, 3, 3))
        M[..., 0, 0] = -eps * self.h_tr[2] * yf_vN
        M[..., 1, 0] = eps * self.h_tr[1] * yf_vN
        M[..., 2, 0] = yf[..., 0]
        for b in range(2):
            yE = np.moveaxis(yv[..., 3:6, b], -1, 0)
            yh = np.moveaxis(yv[..., 0:3, b], -1, 0)
            M[..., 0, 1 + b] = _dot(yE, self.tau2) - eps * self.dtphi_r * yh[2]
            M[..., 1, 1 + b] = _dot(yE, self.tau3) + eps * self.dtphi_r * yh[1]
            M[..., 2, 1 + b] = -_dot(self.h_tr, yh) + _dot(self.E_tr, yE)
        self.M = M
        self.Minv = np.linalg.pinv(M)

    def dt_phi_expr(self, u_tr, phi, g1):
        """Kinematic row solved for dt(phi)."""
        grid = self.grid
        d2phi = fd.d_periodic(phi, grid.h2, 0)
        d3phi = fd.d_periodic(phi, grid.h3, 1)
        return (
            _dot(u_tr[1:4], self.Nring)
            - self.v_tr[1] * d2phi
            - self.v_tr[2] * d3phi
            + self.d1vN * phi
            + g1
        )

    def rows_234(self, u_tr, w_tr, phi, g_bnd):
        """Rows 2-4 with dt(phi) eliminated through the kinematic row."""
        grid = self.grid
        eps = self.eps
        dtphi = self.dt_phi_expr(u_tr, phi, g_bnd[0])
        d2phi = fd.d_periodic(phi, grid.h2, 0)
        d3phi = fd.d_periodic(phi, grid.h3, 1)
        E = w_tr[3:6]
        h = w_tr[0:3]
        r2 = (
            _dot(E, self.tau2)
            - eps * self.dtphi_r * h[2]
            - eps * self.h_tr[2] * dtphi
            + self.d2E1 * phi
            + self.E_tr[0] * d2phi
            - g_bnd[1]
        )
        r3 = (
            _dot(E, self.tau3)
            + eps * self.dtphi_r * h[1]
            + eps * self.h_tr[1] * dtphi
            + self.d3E1 * phi
            + self.E_tr[0] * d3phi
            - g_bnd[2]
        )
        r4 = (
            u_tr[0]
            - _dot(self.h_tr, h)
            + _dot(self.E_tr, E)
            + self.jump * phi
            - self.s_tension * linearized_curvature(phi, self.ws.ring.phi)
            - g_bnd[3]
        )
        return np.stack([r2, r3, r4], axis=-1)

    def project(self, state: Perturbation, g_bnd):
        """Correct the interface traces along the incoming characteristics."""
        u_tr = state.udot[:, 0]
        w_tr = state.vdot[:, -1]
        res = self.rows_234(u_tr, w_tr, state.phi, g_bnd)
        c = -np.einsum("...ij,...j->...i", self.Minv, res)
        state.udot[:, 0] = u_tr + np.moveaxis(self.yf * c[..., 0:1], -1, 0)
        state.vdot[:, -1] = w_tr + np.moveaxis(
            self.yv[..., 0] * c[..., 1:2] + self.yv[..., 1] * c[..., 2:3], -1, 0
        )
        check = self.rows_234(state.udot[:, 0], state.vdot[:, -1], state.phi, g_bnd)
        scale = 1.0 + float(np.max(np.abs(res)))
        worst = float(np.max(np.abs(check)))
        if worst > self.residual_tol * scale:
            raise UnstableRun(
                f"interface closure residual {worst:.3e} exceeds threshold",
                {"residual": worst, "scale": scale},
            )


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


class OuterClosure:
    """Absorbing outer faces: remove incoming characteristic content."""

    def __init__(self, ws: RingWorkspace):
        ring = ws.ring
        grid = ring.grid
        eps = ring.params.epsilon
        n2, n3 = grid.nx2, grid.nx3

        lift_out_p = LiftDerivatives(
            dt_Phi=ws.lift_plus.dt_Phi[-1],
            d1_Phi=ws.lift_plus.d1_Phi[-1],
            d2_Phi=ws.lift_plus.d2_Phi[-1],
            d3_Phi=ws.lift_plus.d3_Phi[-1],
        )
        U_out = FluidState.from_vector(ring.U.as_vector()[:, -1])
        A0 = build_A0(U_out, ring.eos)
        At = build_boundary_fluid(U_out, lift_out_p, ring.eos)
        self.P_fluid = np.zeros((n2, n3, 8, 8))
        for i2 in range(n2):
            for i3 in range(n3):
                sp, Y = characteristic_basis(At[i2, i3], A0[i2, i3])
                tol = 1e-8 * max(np.max(np.abs(sp)), 1e-30)
                inc = sp < -tol  # incoming at the right edge of the fluid slab
                Yin = Y[:, inc]
                self.P_fluid[i2, i3] = np.eye(8) - Yin @ (Yin.T @ A0[i2, i3])

        lift_out_m = LiftDerivatives(
            dt_Phi=ws.lift_minus.dt_Phi[0],
            d1_Phi=ws.lift_minus.d1_Phi[0],
            d2_Phi=ws.lift_minus.d2_Phi[0],
            d3_Phi=ws.lift_minus.d3_Phi[0],
        )
        v_out = reflect(ring.U.v)[:, 0]
        Bt = build_secondary_boundary(v_out, lift_out_m, eps)
        eB0 = eps * build_secondary_symmetrizer(eps * v_out, 0)
        self.P_vac = np.zeros((n2, n3, 6, 6))
        for i2 in range(n2):
            for i3 in range(n3):
                sp, Y = characteristic_basis(Bt[i2, i3], eB0[i2, i3])
                tol = 1e-8 * max(np.max(np.abs(sp)), 1e-30)
                inc = sp > tol  # incoming at the left edge of the vacuum slab
                Yin = Y[:, inc]
                self.P_vac[i2, i3] = np.eye(6) - Yin @ (Yin.T @ eB0[i2, i3])

    def project(self, state: Perturbation):
        u = np.moveaxis(state.udot[:, -1], 0, -1)
        state.udot[:, -1] = np.moveaxis(
            np.einsum("...ij,...j->...i", self.P_fluid, u), -1, 0
        )
        w = np.moveaxis(state.vdot[:, 0], 0, -1)
        state.vdot[:, 0] = np.moveaxis(
            np.einsum("...ij,...j->...i", self.P_vac, w), -1, 0
        )


class SolverWorkspace:
    """Everything precomputed for a run: ring data, closures, step size."""

    def __init__(self, cfg: SolverConfig, ring: BasicState):
        if cfg.grid is not ring.grid and cfg.grid != ring.grid:
            raise ValueError("solver and ring grids differ")
        ring.validate()
        self.cfg = cfg
        self.ring = ring
        self.ws = RingWorkspace.build(ring)
        self.interface = InterfaceClosure(
            self.ws, ring.params.s_tension, cfg.bc_residual_tol
        )
        self.outer = OuterClosure(self.ws)
        speed = max_characteristic_speed(ring)
        h = min(cfg.grid.h1, cfg.grid.h2, cfg.grid.h3)
        stable = cfg.cfl * h / speed
        if cfg.grid.dt is not None:
            if cfg.grid.dt > stable * (1.0 + 1e-12):
                raise ValueError(
                    f"dt={cfg.grid.dt:.3e} exceeds the stability bound {stable:.3e}"
                )
            self.dt = cfg.grid.dt
        else:
            self.dt = stable
        guard = cfg.grid.L1 / speed
        self.run_guard_ok = cfg.t_end < guard

    def rhs(self, state: Perturbation, t, sources: Sources):
        ws = self.ws
        eps = self.ring.params.epsilon
        f = sources.f_at(t, state.udot)
        du = a0_solve(ws.coeffs, f - fluid_linear_terms(ws, state.udot))
        g_vac = sources.g_vac_at(t, state.vdot)
        terms = vacuum_linear_terms(ws, state.vdot, reflect(state.udot[1:4]))
        rhs_v = -terms if g_vac is None else g_vac - terms
        dv = b0_solve(ws.nu, rhs_v) / eps
        g1 = sources.g_bnd_at(t, state.phi.shape)[0]
        dphi = self.interface.dt_phi_expr(state.udot[:, 0], state.phi, g1)
        return du, dv, dphi

    def apply_bc(self, state: Perturbation, t, sources: Sources):
        self.interface.project(state, sources.g_bnd_at(t, state.phi.shape))
        self.outer.project(state)


def advance(state: Perturbation, t, ws: SolverWorkspace, sources: Sources, dt=None):
    """One SSP-RK3 step from t; boundary conditions re-imposed after each stage."""
    dt = ws.dt if dt is None else dt
    du, dv, dphi = ws.rhs(state, t, sources)
    s1 = Perturbation(
        udot=state.udot + dt * du,
        vdot=state.vdot + dt * dv,
        phi=state.phi + dt * dphi,
    )
    ws.apply_bc(s1, t + dt, sources)

    du1, dv1, dphi1 = ws.rhs(s1, t + dt, sources)
    s2 = Perturbation(
        udot=0.75 * state.udot + 0.25 * (s1.udot + dt * du1),
        vdot=0.75 * state.vdot + 0.25 * (s1.vdot + dt * dv1),
        phi=0.75 * state.phi + 0.25 * (s1.phi + dt * dphi1),
    )
    ws.apply_bc(s2, t + 0.5 * dt, sources)

    du2, dv2, dphi2 = ws.rhs(s2, t + 0.5 * dt, sources)
    third = 1.0 / 3.0
    out = Perturbation(
        udot=third * state.udot + (2.0 * third) * (s2.udot + dt * du2),
        vdot=third * state.vdot + (2.0 * third) * (s2.vdot + dt * dv2),
        phi=third * state.phi + (2.0 * third) * (s2.phi + dt * dphi2),
    )
    ws.apply_bc(out, t + dt, sources)
    return out


@dataclass
class RunArtifact:
    """Everything a finished run publishes: config echo, series, summaries, fields."""

    config: dict
    series: list
    summary: dict
    final: Perturbation
    grid: GridSpec


def run_simulation(cfg: SolverConfig, ring: BasicState, sources: Sources | None = None) -> RunArtifact:
    """Advance to t_end collecting the energy series; deterministic per config."""
    sources = sources or Sources()
    ws = SolverWorkspace(cfg, ring)
    n_steps = max(1, int(np.ceil(cfg.t_end / ws.dt - 1e-12)))
    dt = cfg.t_end / n_steps

    state = Perturbation.zero(cfg.grid, with_source=False)
    ws.apply_bc(state, 0.0, sources)
    acc = RunAccumulator(ws.ws)
    f0 = sources.f_at(0.0, state.udot)
    state.f = f0
    row0, _ = acc.push(0.0, state, f0)
    series = [row0.row()]
    guard = cfg.abort_factor * max(1.0, float(np.max(np.abs(f0))))

    t = 0.0
    for step in range(1, n_steps + 1):
        state = advance(state, t, ws, sources, dt)
        t = step * dt
        worst = max(
            float(np.max(np.abs(state.udot))),
            float(np.max(np.abs(state.vdot))),
            float(np.max(np.abs(state.phi))),
        )
        f_now = sources.f_at(t, state.udot)
        guard = max(guard, cfg.abort_factor * max(1.0, float(np.max(np.abs(f_now)))))
        if worst > guard:
            raise UnstableRun(
                f"field magnitude {worst:.3e} exceeded the instability guard at t={t:.4g}",
                {"t": t, "max_field": worst, "step": step},
            )
        if step % cfg.snap_every == 0 or step == n_steps:
            state.f = f_now
            row, _ = acc.push(t, state, f_now)
            series.append(row.row())

    lhs, rhs = acc.lhs_rhs()
    summary = {
        "tEnd": cfg.t_end,
        "steps": n_steps,
        "dt": dt,
        "lhs54": lhs,
        "rhs54": rhs,
        "ratio54": lhs / rhs if rhs > 1e-300 else 0.0,
        "finalI": series[-1]["I"],
        "maxDivFluid": max(r["divFluidMax"] for r in series),
        "maxDivVac": max(r["divVacMax"] for r in series),
        "maxTraceHN": max(r["traceHNMax"] for r in series),
        "ringK": ring.smoothness_bound(),
        "runGuardSatisfied": ws.run_guard_ok,
    }
    config = {
        "tEnd": cfg.t_end,
        "cfl": cfg.cfl,
        "bcOuter": cfg.bc_outer,
        "scheme": cfg.scheme,
        "snapEvery": cfg.snap_every,
        "grid": {
            "nx1": cfg.grid.nx1,
            "nx2": cfg.grid.nx2,
            "nx3": cfg.grid.nx3,
            "L1": cfg.grid.L1,
            "L2": cfg.grid.L2,
            "L3": cfg.grid.L3,
        },
        "epsilon": ring.params.epsilon,
        "sTension": ring.params.s_tension,
    }
    return RunArtifact(config=config, series=series, summary=summary, final=state, grid=cfg.grid)
