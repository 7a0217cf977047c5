"""Interior and boundary operators of the coupled interface problem.

Matrix-vector products are evaluated in closed form from the block structure
(a few 3-vector operations per grid point) rather than by assembling dense
matrices; the dense builders in `matrices` serve as the independent oracle
in the tests.

The linearized interior operators act on the good unknowns
Udot = U - (Psi / d1Phi_ring) d1 U_ring (and likewise for V), after which the
front enters only through the boundary rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fd
from .geometry import (
    InterfaceField,
    LiftDerivatives,
    cutoff_chi,
    lift_Phi,
    linearized_curvature,
    mean_curvature,
    normal_tangents,
)
from .state import (
    EosModel,
    FluidState,
    GridSpec,
    NonHyperbolicState,
    PhysicsParams,
    VacuumState,
    check_hyperbolicity,
)


def _dot3(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b):
    return np.stack(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


# ---------------------------------------------------------------------------
# closed-form actions of the fluid matrices


@dataclass
class FluidCoeffs:
    """Pointwise coefficients of the fluid matrices at a given state."""

    rho: np.ndarray
    ra2: np.ndarray  # rho * a^2 = gamma * p
    v: np.ndarray
    H: np.ndarray
    p: np.ndarray
    eos: EosModel

    @staticmethod
    def at(U: FluidState, eos: EosModel) -> "FluidCoeffs":
        p = U.pressure()
        if np.any(p <= 0.0):
            bad = np.unravel_index(np.argmin(p), np.shape(p))
            raise NonHyperbolicState(
                f"nonpositive derived pressure (min {np.min(p):.6g} at index {bad})"
            )
        return FluidCoeffs(
            rho=eos.rho(p, U.S), ra2=eos.gamma * p, v=U.v, H=U.H, p=p, eos=eos
        )


def a0_apply(c: FluidCoeffs, u):
    """A0(U) u for an 8-component field u."""
    w = (u[0] - _dot3(c.H, u[4:7])) / c.ra2
    out = np.empty_like(u)
    out[0] = w
    out[1:4] = c.rho * u[1:4]
    out[4:7] = u[4:7] - c.H * w
    out[7] = u[7]
    return out


def a0_solve(c: FluidCoeffs, b):
    """A0(U)^{-1} b, closed form."""
    out = np.empty_like(b)
    out[0] = (c.ra2 + _dot3(c.H, c.H)) * b[0] + _dot3(c.H, b[4:7])
    out[1:4] = b[1:4] / c.rho
    out[4:7] = b[4:7] + c.H * b[0]
    out[7] = b[7]
    return out


def ai_apply(c: FluidCoeffs, i: int, u):
    """A_i(U) u = v_i A0 u + unit/H_i couplings, i in {1,2,3}."""
    out = c.v[i - 1] * a0_apply(c, u)
    out[0] += u[i]
    out[i] += u[0]
    out[1:4] -= c.H[i - 1] * u[4:7]
    out[4:7] -= c.H[i - 1] * u[1:4]
    return out


def atilde1_apply(c: FluidCoeffs, lift: LiftDerivatives, u):
    """Lifted normal-flux action (A1 - dtPhi A0 - d2Phi A2 - d3Phi A3) u / d1Phi."""
    out = ai_apply(c, 1, u)
    out -= lift.dt_Phi * a0_apply(c, u)
    out -= lift.d2_Phi * ai_apply(c, 2, u)
    out -= lift.d3_Phi * ai_apply(c, 3, u)
    return out / lift.d1_Phi


def da0_apply(c: FluidCoeffs, udot, g):
    """Directional derivative [dA0(U) . udot] applied to a fixed vector g."""
    pdot = udot[0] - _dot3(c.H, udot[4:7])
    s0 = c.eos.entropy_scale
    rhodot = c.rho * (pdot / (c.eos.gamma * c.p) - s0 * udot[7] / c.eos.gamma)
    wg = (g[0] - _dot3(c.H, g[4:7])) / c.ra2
    dw = -(_dot3(udot[4:7], g[4:7])) / c.ra2 - wg * pdot / c.p
    out = np.empty_like(g)
    out[0] = dw
    out[1:4] = rhodot * g[1:4]
    out[4:7] = -udot[4:7] * wg - c.H * dw
    out[7] = np.zeros_like(g[7])
    return out


def dai_apply(c: FluidCoeffs, i: int, udot, g):
    """Directional derivative [dA_i(U) . udot] applied to g."""
    out = udot[i] * a0_apply(c, g) + c.v[i - 1] * da0_apply(c, udot, g)
    out[1:4] -= udot[3 + i] * g[4:7]
    out[4:7] -= udot[3 + i] * g[1:4]
    return out


def datilde1_apply(c: FluidCoeffs, lift: LiftDerivatives, udot, g):
    out = dai_apply(c, 1, udot, g)
    out -= lift.dt_Phi * da0_apply(c, udot, g)
    out -= lift.d2_Phi * dai_apply(c, 2, udot, g)
    out -= lift.d3_Phi * dai_apply(c, 3, udot, g)
    return out / lift.d1_Phi


# ---------------------------------------------------------------------------
# closed-form actions of the vacuum matrices (secondary symmetrization)


def b0_apply(nu, V):
    """B0(nu) V = (h - nu x E, E + nu x h)."""
    out = np.empty_like(V)
    out[0:3] = V[0:3] - _cross(nu, V[3:6])
    out[3:6] = V[3:6] + _cross(nu, V[0:3])
    return out


def b0_solve(nu, b):
    """B0(nu)^{-1} b; requires |nu| < 1.

    Eliminating E gives ((1-|nu|^2) I + nu nu^T) h = b_h + nu x b_E, whose
    inverse is (I - nu nu^T)/(1-|nu|^2).
    """
    nn = _dot3(nu, nu)
    rhs = b[0:3] + _cross(nu, b[3:6])
    h = (rhs - nu * _dot3(nu, rhs)) / (1.0 - nn)
    out = np.empty_like(b)
    out[0:3] = h
    out[3:6] = b[3:6] - _cross(nu, h)
    return out


def _mj_apply(j, nu, x):
    """M_j(nu) x = x_j nu + (nu . x) e_j - nu_j x."""
    out = nu * x[j - 1] - nu[j - 1] * x
    out[j - 1] += _dot3(nu, x)
    return out


def bj_apply(j: int, nu, V):
    """B_j(nu) V; the nu-independent part is the plain Maxwell flux B_j V."""
    ej = np.zeros(3)
    ej[j - 1] = 1.0
    out = np.empty_like(V)
    out[0:3] = _mj_apply(j, nu, V[0:3]) + _cross_ej(j, V[3:6])
    out[3:6] = _mj_apply(j, nu, V[3:6]) - _cross_ej(j, V[0:3])
    return out


def _cross_ej(j, x):
    """e_j x x without materializing e_j."""
    out = np.zeros_like(x)
    if j == 1:
        out[1] = -x[2]
        out[2] = x[1]
    elif j == 2:
        out[0] = x[2]
        out[2] = -x[0]
    else:
        out[0] = -x[1]
        out[1] = x[0]
    return out


def bj_linear_apply(j: int, mu, g):
    """[B_j(nu + mu) - B_j(nu)] g: the part of B_j linear in nu, at direction mu."""
    out = np.empty_like(g)
    if j == 0:
        out[0:3] = -_cross(mu, g[3:6])
        out[3:6] = _cross(mu, g[0:3])
    else:
        out[0:3] = _mj_apply(j, mu, g[0:3])
        out[3:6] = _mj_apply(j, mu, g[3:6])
    return out


def btilde1_apply(nu, eps, lift: LiftDerivatives, V):
    """Lifted vacuum boundary action (B1 - eps dtPhi B0 - d2Phi B2 - d3Phi B3) V / d1Phi."""
    out = bj_apply(1, nu, V)
    out -= (eps * lift.dt_Phi) * b0_apply(nu, V)
    out -= lift.d2_Phi * bj_apply(2, nu, V)
    out -= lift.d3_Phi * bj_apply(3, nu, V)
    return out / lift.d1_Phi


# ---------------------------------------------------------------------------
# basic state


@dataclass
class BasicState:
    """Frozen background (U_ring, V_ring, phi_ring) the problem is linearized at.

    Fields live on the half-space grids; the state is assumed steady (the
    preset recipes are), so its time derivatives vanish.  Admissibility is
    checked by `validate`: hyperbolicity, |eps v| < 1, front amplitude, and
    the interface conditions used to derive the linearized boundary operator.
    """

    grid: GridSpec
    eos: EosModel
    params: PhysicsParams
    U: FluidState
    V: VacuumState
    phi: InterfaceField
    assembly_tol: float = 1e-9

    def validate(self):
        if not check_hyperbolicity(self.U, self.eos):
            raise NonHyperbolicState("basic state loses hyperbolicity")
        vminus = reflect(self.U.v)
        speed = self.params.epsilon * np.sqrt(_dot3(vminus, vminus))
        if np.max(speed) >= 1.0:
            raise ValueError("basic state violates |eps v| < 1")
        res = residual_boundary_nonlinear(
            trace_plus(self.U.as_vector()),
            trace_minus(self.V.as_vector()),
            self.phi,
            self.params,
        )
        worst = float(np.max(np.abs(res[0:3])))
        if worst > self.assembly_tol:
            raise ValueError(
                f"basic state violates the first three interface conditions "
                f"(residual {worst:.3e} > {self.assembly_tol:.1e})"
            )
        g2, g3 = self.phi.grad()
        Nring, _, _ = normal_tangents(g2, g3)
        HN = _dot3(trace_plus(self.U.H), Nring)
        hN = _dot3(trace_minus(self.V.h), Nring)
        worstN = max(float(np.max(np.abs(HN))), float(np.max(np.abs(hN))))
        if worstN > self.assembly_tol:
            raise ValueError(
                f"basic state violates H.N = h.N = 0 on the interface "
                f"(residual {worstN:.3e})"
            )
        return self

    def smoothness_bound(self):
        """Discrete stand-in for the W-norm bound K: sup of pure derivatives."""
        grid = self.grid
        vals = [0.0]

        def axis_sup(arr, h, axis, depth):
            cur = arr
            vals.append(float(np.max(np.abs(cur))))
            for _ in range(depth):
                if axis == 1:
                    cur = fd.d_normal(cur, h, axis)
                else:
                    cur = fd.d_periodic(cur, h, axis)
                vals.append(float(np.max(np.abs(cur))))

        for arr in (self.U.as_vector(), self.V.as_vector()):
            axis_sup(arr, grid.h1, 1, 3)
            axis_sup(arr, grid.h2, 2, 3)
            axis_sup(arr, grid.h3, 3, 3)
        phi = self.phi.phi
        for axis, h in ((0, grid.h2), (1, grid.h3)):
            cur = phi
            for _ in range(4):
                vals.append(float(np.max(np.abs(cur))))
                cur = fd.d_periodic(cur, h, axis)
        return max(vals)


def reflect(field):
    """Mirror a fluid field onto the vacuum grid: g(x1) -> g(-x1) by index flip."""
    return field[..., ::-1, :, :]


def trace_plus(field):
    """Interface trace of a fluid-side field (x1 = 0 is the first node)."""
    return field[..., 0, :, :]


def trace_minus(field):
    """Interface trace of a vacuum-side field (x1 = 0 is the last node)."""
    return field[..., -1, :, :]


@dataclass
class RingWorkspace:
    """Derived background data reused by the operators and the solver."""

    ring: BasicState
    coeffs: FluidCoeffs
    lift_plus: LiftDerivatives
    lift_minus: LiftDerivatives
    nu: np.ndarray  # eps * v_ring reflected, on the vacuum grid
    dU: dict = field(default_factory=dict)  # ring derivatives: keys t,1,2,3
    dV: dict = field(default_factory=dict)

    @staticmethod
    def build(ring: BasicState) -> "RingWorkspace":
        grid = ring.grid
        Uvec = ring.U.as_vector()
        Vvec = ring.V.as_vector()
        dU = {
            "t": np.zeros_like(Uvec),
            "1": fd.d_normal(Uvec, grid.h1, 1),
            "2": fd.d_periodic(Uvec, grid.h2, 2),
            "3": fd.d_periodic(Uvec, grid.h3, 3),
        }
        dV = {
            "t": np.zeros_like(Vvec),
            "1": fd.d_normal(Vvec, grid.h1, 1),
            "2": fd.d_periodic(Vvec, grid.h2, 2),
            "3": fd.d_periodic(Vvec, grid.h3, 3),
        }
        return RingWorkspace(
            ring=ring,
            coeffs=FluidCoeffs.at(ring.U, ring.eos),
            lift_plus=lift_Phi(ring.phi, grid, "+"),
            lift_minus=lift_Phi(ring.phi, grid, "-"),
            nu=ring.params.epsilon * reflect(ring.U.v),
            dU=dU,
            dV=dV,
        )


# ---------------------------------------------------------------------------
# nonlinear residual evaluators


def residual_fluid_nonlinear(U: FluidState, dtU, phi_if: InterfaceField, grid: GridSpec, eos: EosModel):
    """Residual of the lifted fluid system A0 dtU + A~1 d1U + A2 d2U + A3 d3U.

    dtU holds the time derivative of the 8-component field (analytic for
    manufactured states, finite differences for stored histories).
    """
    c = FluidCoeffs.at(U, eos)
    lift = lift_Phi(phi_if, grid, "+")
    u = U.as_vector()
    res = a0_apply(c, dtU)
    res += atilde1_apply(c, lift, fd.d_normal(u, grid.h1, 1))
    res += ai_apply(c, 2, fd.d_periodic(u, grid.h2, 2))
    res += ai_apply(c, 3, fd.d_periodic(u, grid.h3, 3))
    return res


def residual_vacuum_secondary(V: VacuumState, dtV, v_minus, phi_if: InterfaceField, grid: GridSpec, eps: float):
    """Residual of the secondary-symmetrized vacuum system.

    eps B0(nu) dtV + B~1(nu) d1V + B2(nu) d2V + B3(nu) d3V with nu = eps*v_minus;
    with v_minus = 0 this is exactly the plain lifted Maxwell residual.
    """
    nu = eps * np.asarray(v_minus, dtype=float)
    nn = _dot3(nu, nu)
    if np.max(nn) >= 1.0:
        raise ValueError("secondary symmetrizer loses positivity: |eps v| >= 1")
    lift = lift_Phi(phi_if, grid, "-")
    w = V.as_vector()
    res = eps * b0_apply(nu, dtV)
    res += btilde1_apply(nu, eps, lift, fd.d_normal(w, grid.h1, 1))
    res += bj_apply(2, nu, fd.d_periodic(w, grid.h2, 2))
    res += bj_apply(3, nu, fd.d_periodic(w, grid.h3, 3))
    return res


def residual_boundary_nonlinear(u_trace, w_trace, phi_if: InterfaceField, params: PhysicsParams):
    """The four interface conditions evaluated on traces at x1 = 0.

    Rows: kinematic condition, the two jump conditions for E, and the normal
    stress balance including the surface-tension term.
    """
    g2, g3 = phi_if.grad()
    N, tau2, tau3 = normal_tangents(g2, g3)
    v = u_trace[1:4]
    h = w_trace[0:3]
    E = w_trace[3:6]
    eps = params.epsilon
    rows = np.empty((4,) + phi_if.phi.shape)
    rows[0] = phi_if.dt_phi - _dot3(v, N)
    rows[1] = _dot3(E, tau2) - eps * h[2] * phi_if.dt_phi
    rows[2] = _dot3(E, tau3) + eps * h[1] * phi_if.dt_phi
    rows[3] = (
        u_trace[0]
        - 0.5 * _dot3(h, h)
        + 0.5 * _dot3(E, E)
        - params.s_tension * mean_curvature(phi_if)
    )
    return rows


# ---------------------------------------------------------------------------
# good unknowns


def good_unknowns(u_raw, w_raw, phi, ws: RingWorkspace):
    """Alinhac substitution: subtract (Psi / d1Phi_ring) d1(ring) from each side."""
    grid = ws.ring.grid
    chi_p, _ = cutoff_chi(grid.x1_plus())
    chi_m, _ = cutoff_chi(grid.x1_minus())
    psi_p = chi_p[:, None, None] * phi[None]
    psi_m = chi_m[:, None, None] * phi[None]
    udot = u_raw - (psi_p / ws.lift_plus.d1_Phi) * ws.dU["1"]
    wdot = w_raw - (psi_m / ws.lift_minus.d1_Phi) * ws.dV["1"]
    return udot, wdot


def good_unknowns_inverse(udot, wdot, phi, ws: RingWorkspace):
    grid = ws.ring.grid
    chi_p, _ = cutoff_chi(grid.x1_plus())
    chi_m, _ = cutoff_chi(grid.x1_minus())
    psi_p = chi_p[:, None, None] * phi[None]
    psi_m = chi_m[:, None, None] * phi[None]
    u_raw = udot + (psi_p / ws.lift_plus.d1_Phi) * ws.dU["1"]
    w_raw = wdot + (psi_m / ws.lift_minus.d1_Phi) * ws.dV["1"]
    return u_raw, w_raw


# ---------------------------------------------------------------------------
# exact linearization: zero-order coefficients and interior operators


def coeff_C_plus(ws: RingWorkspace, udot):
    """Zero-order term of the exact fluid linearization.

    [dA0 . udot] dt(ring) + [dA~1 . udot] d1(ring) + sum_k [dA_k . udot] dk(ring),
    with the matrix directional derivatives taken analytically.
    """
    c = ws.coeffs
    out = da0_apply(c, udot, ws.dU["t"])
    out += datilde1_apply(c, ws.lift_plus, udot, ws.dU["1"])
    out += dai_apply(c, 2, udot, ws.dU["2"])
    out += dai_apply(c, 3, udot, ws.dU["3"])
    return out


def coeff_C_minus(ws: RingWorkspace, vdot_minus):
    """Zero-order term of the vacuum linearization, acting on the reflected velocity."""
    eps = ws.ring.params.epsilon
    mu = eps * vdot_minus
    lift = ws.lift_minus
    out = eps * bj_linear_apply(0, mu, ws.dV["t"])
    inner = bj_linear_apply(1, mu, ws.dV["1"])
    inner -= (eps * lift.dt_Phi) * bj_linear_apply(0, mu, ws.dV["1"])
    inner -= lift.d2_Phi * bj_linear_apply(2, mu, ws.dV["1"])
    inner -= lift.d3_Phi * bj_linear_apply(3, mu, ws.dV["1"])
    out += inner / lift.d1_Phi
    out += bj_linear_apply(2, mu, ws.dV["2"])
    out += bj_linear_apply(3, mu, ws.dV["3"])
    return out


def fluid_linear_terms(ws: RingWorkspace, udot):
    """Spatial + zero-order part of the linearized fluid operator (no A0 dt term)."""
    grid = ws.ring.grid
    c = ws.coeffs
    out = atilde1_apply(c, ws.lift_plus, fd.d_normal(udot, grid.h1, 1))
    out += ai_apply(c, 2, fd.d_periodic(udot, grid.h2, 2))
    out += ai_apply(c, 3, fd.d_periodic(udot, grid.h3, 3))
    out += coeff_C_plus(ws, udot)
    return out


def vacuum_linear_terms(ws: RingWorkspace, wdot, vdot_minus):
    """Spatial + zero-order part of the linearized vacuum operator (no eps B0 dt term)."""
    grid = ws.ring.grid
    eps = ws.ring.params.epsilon
    out = btilde1_apply(ws.nu, eps, ws.lift_minus, fd.d_normal(wdot, grid.h1, 1))
    out += bj_apply(2, ws.nu, fd.d_periodic(wdot, grid.h2, 2))
    out += bj_apply(3, ws.nu, fd.d_periodic(wdot, grid.h3, 3))
    out += coeff_C_minus(ws, vdot_minus)
    return out


def _direction_lift(phi_dir, dt_phi_dir, grid: GridSpec, side: str):
    """Derivative components of the lift of a front direction (theta-linear part)."""
    x1 = grid.x1_plus() if side == "+" else grid.x1_minus()
    chi, dchi = cutoff_chi(x1)
    chi = chi[:, None, None]
    dchi = dchi[:, None, None]
    d2 = fd.d_periodic(phi_dir, grid.h2, 0)
    d3 = fd.d_periodic(phi_dir, grid.h3, 1)
    return (
        chi * dt_phi_dir[None],
        dchi * phi_dir[None],
        chi * d2[None],
        chi * d3[None],
    )


def front_direction_term_fluid(ws: RingWorkspace, phi_dir, dt_phi_dir):
    """Front-direction part of the exact fluid linearization in raw unknowns.

    This is [d A~1 . (lift of the front direction)] applied to d1(ring):
    -(1/d1Phi) [dt-dir A0 + d1-dir A~1 + d2-dir A2 + d3-dir A3] d1(ring).
    """
    grid = ws.ring.grid
    c = ws.coeffs
    dt_d, d1_d, d2_d, d3_d = _direction_lift(phi_dir, dt_phi_dir, grid, "+")
    g = ws.dU["1"]
    out = dt_d * a0_apply(c, g)
    out += d1_d * atilde1_apply(c, ws.lift_plus, g)
    out += d2_d * ai_apply(c, 2, g)
    out += d3_d * ai_apply(c, 3, g)
    return -out / ws.lift_plus.d1_Phi


def front_direction_term_vacuum(ws: RingWorkspace, phi_dir, dt_phi_dir):
    """Front-direction part of the exact vacuum linearization in raw unknowns."""
    grid = ws.ring.grid
    eps = ws.ring.params.epsilon
    dt_d, d1_d, d2_d, d3_d = _direction_lift(phi_dir, dt_phi_dir, grid, "-")
    g = ws.dV["1"]
    out = (eps * dt_d) * b0_apply(ws.nu, g)
    out += d1_d * btilde1_apply(ws.nu, eps, ws.lift_minus, g)
    out += d2_d * bj_apply(2, ws.nu, g)
    out += d3_d * bj_apply(3, ws.nu, g)
    return -out / ws.lift_minus.d1_Phi


def linearized_interior_raw(u_raw, dt_u_raw, w_raw, dt_w_raw, vraw_minus, phi_dir, dt_phi_dir, ws: RingWorkspace):
    """Exact linearization in the raw (pre-good-unknown) variables.

    Matches the theta-derivative of the discrete nonlinear residuals to O(theta)
    at any fixed grid, which pins every coefficient including the zero-order
    terms; the good-unknown form differs by the algebraic substitution and the
    dropped background-residual term.
    """
    eps = ws.ring.params.epsilon
    res_f = a0_apply(ws.coeffs, dt_u_raw) + fluid_linear_terms(ws, u_raw)
    res_f += front_direction_term_fluid(ws, phi_dir, dt_phi_dir)
    res_v = eps * b0_apply(ws.nu, dt_w_raw) + vacuum_linear_terms(ws, w_raw, vraw_minus)
    res_v += front_direction_term_vacuum(ws, phi_dir, dt_phi_dir)
    return res_f, res_v


@dataclass
class Perturbation:
    """Good unknowns (Udot, Vdot, phi) plus the fluid source f."""

    udot: np.ndarray  # (8, nx1+1, nx2, nx3)
    vdot: np.ndarray  # (6, nx1+1, nx2, nx3)
    phi: np.ndarray  # (nx2, nx3)
    f: np.ndarray | None = None

    @staticmethod
    def zero(grid: GridSpec, with_source=True):
        sh = (grid.nx1 + 1, grid.nx2, grid.nx3)
        return Perturbation(
            udot=np.zeros((8,) + sh),
            vdot=np.zeros((6,) + sh),
            phi=np.zeros((grid.nx2, grid.nx3)),
            f=np.zeros((8,) + sh) if with_source else None,
        )

    def copy(self):
        return Perturbation(
            udot=self.udot.copy(),
            vdot=self.vdot.copy(),
            phi=self.phi.copy(),
            f=None if self.f is None else self.f.copy(),
        )


def linearized_interior(pert: Perturbation, rate: Perturbation, ws: RingWorkspace):
    """Residuals of the linearized interior equations.

    Fluid: A0 dt(Udot) + A~1 d1(Udot) + A2 d2 + A3 d3 + C+ Udot - f.
    Vacuum: eps B0 dt(Vdot) + B~1 d1 + B2 d2 + B3 d3 + C- vdot_minus.
    `rate` carries the time derivatives of the perturbation fields.
    """
    eps = ws.ring.params.epsilon
    res_f = a0_apply(ws.coeffs, rate.udot) + fluid_linear_terms(ws, pert.udot)
    if pert.f is not None:
        res_f = res_f - pert.f
    vdot_minus = reflect(pert.udot[1:4])
    res_v = eps * b0_apply(ws.nu, rate.vdot) + vacuum_linear_terms(
        ws, pert.vdot, vdot_minus
    )
    return res_f, res_v


def linearized_boundary(pert: Perturbation, dt_phi, ws: RingWorkspace):
    """The four rows of the linearized interface operator on the trace grid.

    Row 4 contains the jump coefficient [d1 q_ring] and the surface-tension
    term -s * div'(B_ring grad' phi).
    """
    ring = ws.ring
    grid = ring.grid
    params = ring.params
    eps = params.epsilon
    g2r, g3r = ring.phi.grad()
    Nring, tau2, tau3 = normal_tangents(g2r, g3r)
    u = trace_plus(pert.udot)
    w = trace_minus(pert.vdot)
    phi = pert.phi
    d2phi = fd.d_periodic(phi, grid.h2, 0)
    d3phi = fd.d_periodic(phi, grid.h3, 1)

    vr = trace_plus(ring.U.v)
    d1U = trace_plus(ws.dU["1"])
    d1V = trace_minus(ws.dV["1"])
    hr = trace_minus(ring.V.h)
    Er = trace_minus(ring.V.E)
    dtphi_r = ring.phi.dt_phi

    # d1(v_ring . N_ring) on the interface; N_ring is x1-independent
    d1vN = d1U[1] - d1U[2] * g2r - d1U[3] * g3r
    rows = np.empty((4,) + phi.shape)
    rows[0] = (
        dt_phi
        + vr[1] * d2phi
        + vr[2] * d3phi
        - d1vN * phi
        - _dot3(u[1:4], Nring)
    )
    # steady background: dt of ring h vanishes; E1_ring tangential derivatives kept
    d2E1 = trace_minus(fd.d_periodic(ring.V.E[0], grid.h2, 1))
    d3E1 = trace_minus(fd.d_periodic(ring.V.E[0], grid.h3, 2))
    rows[1] = (
        _dot3(w[3:6], tau2)
        - eps * dtphi_r * w[2]
        - eps * hr[2] * dt_phi
        + d2E1 * phi
        + Er[0] * d2phi
    )
    rows[2] = (
        _dot3(w[3:6], tau3)
        + eps * dtphi_r * w[1]
        + eps * hr[1] * dt_phi
        + d3E1 * phi
        + Er[0] * d3phi
    )
    jump = d1U[0] - _dot3(hr, d1V[0:3]) + _dot3(Er, d1V[3:6])
    rows[3] = (
        u[0]
        - _dot3(hr, w[0:3])
        + _dot3(Er, w[3:6])
        + jump * phi
        - params.s_tension * linearized_curvature(phi, ring.phi)
    )
    return rows


# ---------------------------------------------------------------------------
# linear constraints


@dataclass
class ConstraintReport:
    """Residuals of the linear divergence and trace constraints."""

    div_fluid: np.ndarray
    div_vac_h: np.ndarray
    div_vac_E: np.ndarray
    trace_HN: np.ndarray
    trace_hN: np.ndarray

    def max_abs(self):
        return {
            "divFluid": float(np.max(np.abs(self.div_fluid))),
            "divVacH": float(np.max(np.abs(self.div_vac_h))),
            "divVacE": float(np.max(np.abs(self.div_vac_E))),
            "traceHN": float(np.max(np.abs(self.trace_HN))),
            "tracehN": float(np.max(np.abs(self.trace_hN))),
        }

    def to_json(self):
        return self.max_abs()


def _lifted_divergence(vec3, lift: LiftDerivatives, grid: GridSpec):
    """div of (g_N, g2 d1Phi, g3 d1Phi) with g_N = g1 - g2 d2Phi - g3 d3Phi."""
    gN = vec3[0] - vec3[1] * lift.d2_Phi - vec3[2] * lift.d3_Phi
    return (
        fd.d_normal(gN, grid.h1, 0)
        + fd.d_periodic(vec3[1] * lift.d1_Phi, grid.h2, 1)
        + fd.d_periodic(vec3[2] * lift.d1_Phi, grid.h3, 2)
    )


def constraints(pert: Perturbation, ws: RingWorkspace) -> ConstraintReport:
    """Evaluate the lifted divergences and the interface trace identities."""
    ring = ws.ring
    grid = ring.grid
    Hdot = pert.udot[4:7]
    hdot = pert.vdot[0:3]
    Edot = pert.vdot[3:6]
    div_fluid = _lifted_divergence(Hdot, ws.lift_plus, grid)
    div_h = _lifted_divergence(hdot, ws.lift_minus, grid)
    div_E = _lifted_divergence(Edot, ws.lift_minus, grid)

    g2r, g3r = ring.phi.grad()
    d2phi = fd.d_periodic(pert.phi, grid.h2, 0)
    d3phi = fd.d_periodic(pert.phi, grid.h3, 1)
    Htr = trace_plus(ring.U.H)
    htr = trace_minus(ring.V.h)
    d1H = trace_plus(ws.dU["1"])[4:7]
    d1h = trace_minus(ws.dV["1"])[0:3]
    d1HN = d1H[0] - d1H[1] * g2r - d1H[2] * g3r
    d1hN = d1h[0] - d1h[1] * g2r - d1h[2] * g3r
    HdotN = trace_plus(Hdot[0] - Hdot[1] * ws.lift_plus.d2_Phi - Hdot[2] * ws.lift_plus.d3_Phi)
    hdotN = trace_minus(hdot[0] - hdot[1] * ws.lift_minus.d2_Phi - hdot[2] * ws.lift_minus.d3_Phi)
    trace_HN = HdotN - (Htr[1] * d2phi + Htr[2] * d3phi - pert.phi * d1HN)
    trace_hN = hdotN - (htr[1] * d2phi + htr[2] * d3phi - pert.phi * d1hN)
    return ConstraintReport(div_fluid, div_h, div_E, trace_HN, trace_hN)


def tEN_identity(pert: Perturbation, rate: Perturbation, ws: RingWorkspace):
    """Residual of the vacuum identity for the normal electric trace.

    eps dt(E_N) - d2(h3 + h1 d2Phi + eps E3 dtPhi) + d3(h2 + h1 d3Phi - eps E2 dtPhi);
    vanishes for solutions of the vacuum system satisfying its divergences.
    """
    ring = ws.ring
    grid = ring.grid
    eps = ring.params.epsilon
    lift = ws.lift_minus
    h = pert.vdot[0:3]
    E = pert.vdot[3:6]
    dtE = rate.vdot[3:6]
    dtEN = dtE[0] - dtE[1] * lift.d2_Phi - dtE[2] * lift.d3_Phi
    term2 = h[2] + h[0] * lift.d2_Phi + eps * E[2] * lift.dt_Phi
    term3 = h[1] + h[0] * lift.d3_Phi - eps * E[1] * lift.dt_Phi
    return (
        eps * dtEN
        - fd.d_periodic(term2, grid.h2, 1)
        + fd.d_periodic(term3, grid.h3, 2)
    )
