"""Conormal calculus, energy functionals, boundary forms, estimate verifier.

Space-time integrals use trapezoid quadrature over stored snapshots; spatial
reductions use trapezoid weights along the bounded normal axis and uniform
weights along the periodic tangential axes.  Sums are plain numpy reductions
(fixed pairwise trees), so repeated runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fd
from .geometry import curvature_matrix, sigma_weight
from .matrices import build_boundary_fluid, build_secondary_boundary
from .operators import (
    Perturbation,
    RingWorkspace,
    a0_apply,
    b0_apply,
    constraints,
    trace_minus,
    trace_plus,
)
from .state import FluidState, GridSpec


@dataclass(frozen=True)
class ConormalWeight:
    """Weight sigma(x1): equal to x1 near the interface, 1 far from it."""

    sigma: np.ndarray
    dsigma: np.ndarray

    @staticmethod
    def on(x1):
        s, ds = sigma_weight(np.abs(x1))
        return ConormalWeight(sigma=s, dsigma=ds)


def conormal_derivative(u_hist, times, alpha, grid: GridSpec, x1=None):
    """Apply D_tan^alpha = dt^a0 (sigma d1)^a1 d2^a2 d3^a3 to a field history.

    u_hist has shape (nt, ...) with the normal axis first among the spatial
    axes; alpha = (a0, a1, a2, a3).  Time derivatives need a0+1 stored levels.
    """
    a0, a1, a2, a3 = alpha
    u = np.asarray(u_hist, dtype=float)
    t = np.asarray(times, dtype=float)
    if u.shape[0] < a0 + 1:
        raise ValueError(f"need at least {a0 + 1} time levels for alpha0 = {a0}")
    for _ in range(a0):
        u = np.gradient(u, t, axis=0)
    if x1 is None:
        x1 = grid.x1_plus()
    sig = sigma_weight(np.abs(np.asarray(x1)))[0][None, :, None, None]
    for _ in range(a1):
        u = sig * fd.d_normal(u, grid.h1, 1)
    for _ in range(a2):
        u = fd.d_periodic(u, grid.h2, 2)
    for _ in range(a3):
        u = fd.d_periodic(u, grid.h3, 3)
    return u


def space_weights(grid: GridSpec):
    """Quadrature weights on one half-space grid, shape (nx1+1, 1, 1)."""
    w1 = fd.trapezoid_weights(grid.nx1 + 1, grid.h1)
    return (w1 * grid.h2 * grid.h3)[:, None, None]


def l2sq(field_arr, w):
    """Squared weighted L2 norm; sums every axis including components."""
    return float(np.sum(field_arr * field_arr * w))


def norm_H1tan(u_hist, times, grid: GridSpec):
    """H1_tan space-time norm of a fluid-side field history (nt, ncomp, ...)."""
    t = np.asarray(times, dtype=float)
    w = space_weights(grid)
    alphas = [(0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    total = 0.0
    for alpha in alphas:
        d = conormal_derivative(u_hist, t, alpha, grid)
        per_t = np.array([l2sq(d[i], w) for i in range(d.shape[0])])
        total += float(np.trapezoid(per_t, t))
    return float(np.sqrt(total))


def energy_I(pert: Perturbation, ws: RingWorkspace):
    """Interior energy: int A0(ring) Udot.Udot + int B0(ring) Vdot.Vdot."""
    w = space_weights(ws.ring.grid)
    fluid = float(np.sum(a0_apply(ws.coeffs, pert.udot) * pert.udot * w))
    vac = float(np.sum(b0_apply(ws.nu, pert.vdot) * pert.vdot * w))
    return fluid + vac, fluid, vac


def mu_ring(ws: RingWorkspace):
    """Interface coefficient mu = 2 (E1 + eps v2 h3 - eps v3 h2) of the background."""
    eps = ws.ring.params.epsilon
    E = trace_minus(ws.ring.V.E)
    h = trace_minus(ws.ring.V.h)
    v = trace_plus(ws.ring.U.v)
    return 2.0 * (E[0] + eps * (v[1] * h[2] - v[2] * h[1]))


def surf_term(phi, ws: RingWorkspace, s_tension):
    """Surface energy s * int |grad' phi|^2 / |N_ring|^3 on the interface."""
    grid = ws.ring.grid
    g2 = fd.d_periodic(phi, grid.h2, 0)
    g3 = fd.d_periodic(phi, grid.h3, 1)
    gr2, gr3 = ws.ring.phi.grad()
    n3 = (1.0 + gr2**2 + gr3**2) ** 1.5
    return float(s_tension * np.sum((g2 * g2 + g3 * g3) / n3) * grid.h2 * grid.h3)


@dataclass
class EnergyReport:
    """Scalar diagnostics at one time level."""

    t: float
    I: float
    I_fluid: float
    I_vac: float
    Itan1: float
    surfTerm: float
    ratio54: float
    divFluidMax: float
    divVacMax: float
    traceHNMax: float

    def row(self):
        return {
            "t": self.t,
            "I": self.I,
            "Itan1": self.Itan1,
            "Ivac": self.I_vac,
            "surfTerm": self.surfTerm,
            "ratio54": self.ratio54,
            "divFluidMax": self.divFluidMax,
            "divVacMax": self.divVacMax,
            "traceHNMax": self.traceHNMax,
        }


SERIES_COLUMNS = (
    "t",
    "I",
    "Itan1",
    "Ivac",
    "surfTerm",
    "ratio54",
    "divFluidMax",
    "divVacMax",
    "traceHNMax",
)


def boundary_form_Q(pert: Perturbation, rate: Perturbation, ws: RingWorkspace):
    """Boundary quadratic form and its surface-tension decomposition.

    Qraw = -(A~1 Udot . Udot) + (1/eps)(B1 Vdot . Vdot) on the interface.  The
    decomposition splits the exact time-derivative surface term
    s dt(B grad'phi . grad'phi), the mu*phi*dt(E_N) term, tangential flux
    divergences (which integrate to zero), and reports the remainder, which
    collects the genuinely lower-order couplings.
    """
    ring = ws.ring
    grid = ring.grid
    eps = ring.params.epsilon
    s = ring.params.s_tension
    u = trace_plus(pert.udot)
    wv = trace_minus(pert.vdot)

    Uring_tr = FluidState.from_vector(trace_plus(ring.U.as_vector()))
    lift_tr = _trace_lift(ws)
    At = build_boundary_fluid(Uring_tr, lift_tr, ring.eos)
    Bt = build_secondary_boundary(
        trace_plus(ring.U.v), lift_tr, eps
    )
    ub = np.moveaxis(u, 0, -1)
    wb = np.moveaxis(wv, 0, -1)
    q_fluid = -np.einsum("...ij,...i,...j->...", At, ub, ub)
    q_vac = np.einsum("...ij,...i,...j->...", Bt, wb, wb) / eps
    q_raw = q_fluid + q_vac

    # exact-derivative surface term of the decomposition
    B = curvature_matrix(ring.phi)
    g2 = fd.d_periodic(pert.phi, grid.h2, 0)
    g3 = fd.d_periodic(pert.phi, grid.h3, 1)
    r2 = fd.d_periodic(rate.phi, grid.h2, 0)
    r3 = fd.d_periodic(rate.phi, grid.h3, 1)
    w2, w3 = B.apply(g2, g3)
    surf_flux = 2.0 * s * (w2 * r2 + w3 * r3)  # = s dt(B grad phi . grad phi)

    mu = mu_ring(ws)
    lm = ws.lift_minus
    EN = wv[3] - wv[4] * trace_minus(lm.d2_Phi) - wv[5] * trace_minus(lm.d3_Phi)
    rv = trace_minus(rate.vdot)
    dt_EN = rv[3] - rv[4] * trace_minus(lm.d2_Phi) - rv[5] * trace_minus(lm.d3_Phi)
    mu_term = mu * (rate.phi * EN + pert.phi * dt_EN)

    # tangential flux divergences (vanish under the interface integral)
    gr2, gr3 = ring.phi.grad()
    tau2 = np.stack([gr2, np.ones_like(gr2), np.zeros_like(gr2)])
    tau3 = np.stack([gr3, np.zeros_like(gr3), np.ones_like(gr3)])
    hdot = wv[0:3]
    Edot = wv[3:6]
    dtphi_r = ring.phi.dt_phi
    flux2 = mu * pert.phi * (Edot[1] * dtphi_r - _dot3v(hdot, tau3))
    flux3 = mu * pert.phi * (Edot[2] * dtphi_r + _dot3v(hdot, tau2))
    fluxes = (
        fd.d_periodic(flux2 - 2.0 * s * rate.phi * w2, grid.h2, 0)
        + fd.d_periodic(flux3 - 2.0 * s * rate.phi * w3, grid.h3, 1)
    )
    lower = q_raw - surf_flux - mu_term - fluxes
    return {
        "Qraw": q_raw,
        "surfFlux": surf_flux,
        "muTerm": mu_term,
        "fluxes": fluxes,
        "lower": lower,
    }


def _dot3v(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _trace_lift(ws: RingWorkspace):
    from .geometry import LiftDerivatives

    lp = ws.lift_plus
    return LiftDerivatives(
        dt_Phi=trace_plus(lp.dt_Phi),
        d1_Phi=trace_plus(lp.d1_Phi),
        d2_Phi=trace_plus(lp.d2_Phi),
        d3_Phi=trace_plus(lp.d3_Phi),
    )


class RunAccumulator:
    """Accumulates the space-time norms of the a priori estimate over snapshots.

    lhs = |Udot|_{H1tan} + |Vdot|_{H1} + |(phi, grad'phi)|_{H1};  rhs = |f|_{H1tan}.
    Time derivatives are backward differences of consecutive snapshots, other
    derivatives the standard grid stencils; time integration is trapezoidal.
    """

    def __init__(self, ws: RingWorkspace):
        self.ws = ws
        grid = ws.ring.grid
        self.w = space_weights(grid)
        self.wg = grid.h2 * grid.h3
        self.sig_p = sigma_weight(np.abs(grid.x1_plus()))[0][:, None, None]
        self.times = []
        self.sq_u = []  # per-snapshot sum over alpha of |D^a Udot|^2
        self.sq_v = []
        self.sq_phi = []
        self.sq_f = []
        self.prev = None
        self.prev_t = None
        self.prev_f = None

    def _fluid_h1tan_sq(self, a, rate_a):
        grid = self.ws.ring.grid
        tot = l2sq(a, self.w)
        tot += l2sq(rate_a, self.w)
        tot += l2sq(self.sig_p * fd.d_normal(a, grid.h1, 1), self.w)
        tot += l2sq(fd.d_periodic(a, grid.h2, 2), self.w)
        tot += l2sq(fd.d_periodic(a, grid.h3, 3), self.w)
        return tot

    def _vac_h1_sq(self, a, rate_a):
        grid = self.ws.ring.grid
        tot = l2sq(a, self.w)
        tot += l2sq(rate_a, self.w)
        tot += l2sq(fd.d_normal(a, grid.h1, 1), self.w)
        tot += l2sq(fd.d_periodic(a, grid.h2, 2), self.w)
        tot += l2sq(fd.d_periodic(a, grid.h3, 3), self.w)
        return tot

    def _front_h1_sq(self, phi, rate_phi):
        grid = self.ws.ring.grid
        tot = 0.0
        pieces = [phi, fd.d_periodic(phi, grid.h2, 0), fd.d_periodic(phi, grid.h3, 1)]
        rates = [rate_phi, fd.d_periodic(rate_phi, grid.h2, 0), fd.d_periodic(rate_phi, grid.h3, 1)]
        for g, rg in zip(pieces, rates):
            tot += float(np.sum(g * g)) * self.wg
            tot += float(np.sum(rg * rg)) * self.wg
            d2 = fd.d_periodic(g, grid.h2, 0)
            d3 = fd.d_periodic(g, grid.h3, 1)
            tot += float(np.sum(d2 * d2 + d3 * d3)) * self.wg
        return tot

    def push(self, t, pert: Perturbation, f_now):
        """Record one snapshot; returns the EnergyReport row for the series."""
        if self.prev is None:
            rate = Perturbation(
                udot=np.zeros_like(pert.udot),
                vdot=np.zeros_like(pert.vdot),
                phi=np.zeros_like(pert.phi),
            )
            rate_f = np.zeros_like(pert.udot) if f_now is not None else None
        else:
            dt = t - self.prev_t
            rate = Perturbation(
                udot=(pert.udot - self.prev.udot) / dt,
                vdot=(pert.vdot - self.prev.vdot) / dt,
                phi=(pert.phi - self.prev.phi) / dt,
            )
            rate_f = None
            if f_now is not None and self.prev_f is not None:
                rate_f = (f_now - self.prev_f) / dt

        self.times.append(t)
        u_sq = self._fluid_h1tan_sq(pert.udot, rate.udot)
        self.sq_u.append(u_sq)
        self.sq_v.append(self._vac_h1_sq(pert.vdot, rate.vdot))
        self.sq_phi.append(self._front_h1_sq(pert.phi, rate.phi))
        if f_now is None:
            self.sq_f.append(0.0)
        else:
            self.sq_f.append(self._fluid_h1tan_sq(f_now, rate_f))

        I, I_f, I_v = energy_I(pert, self.ws)
        rep = constraints(pert, self.ws).max_abs()
        lhs, rhs = self.lhs_rhs()
        ratio = lhs / rhs if rhs > 1e-300 else 0.0
        row = EnergyReport(
            t=t,
            I=I,
            I_fluid=I_f,
            I_vac=I_v,
            Itan1=u_sq,
            surfTerm=surf_term(pert.phi, self.ws, self.ws.ring.params.s_tension),
            ratio54=ratio,
            divFluidMax=rep["divFluid"],
            divVacMax=max(rep["divVacH"], rep["divVacE"]),
            traceHNMax=max(rep["traceHN"], rep["tracehN"]),
        )
        self.prev = pert.copy()
        self.prev_t = t
        self.prev_f = None if f_now is None else f_now.copy()
        return row, rate

    def lhs_rhs(self):
        t = np.array(self.times)
        if len(t) < 2:
            return 0.0, 0.0
        lhs = (
            np.sqrt(np.trapezoid(np.array(self.sq_u), t))
            + np.sqrt(np.trapezoid(np.array(self.sq_v), t))
            + np.sqrt(np.trapezoid(np.array(self.sq_phi), t))
        )
        rhs = np.sqrt(np.trapezoid(np.array(self.sq_f), t))
        return float(lhs), float(rhs)


def verify_estimate_54(artifact):
    """(lhs, rhs, ratio) of the a priori energy estimate for a finished run.

    Flags runs where the forcing vanishes but the solution does not; those
    would contradict uniqueness of the zero solution.
    """
    lhs = artifact.summary["lhs54"]
    rhs = artifact.summary["rhs54"]
    ratio = lhs / rhs if rhs > 1e-300 else (0.0 if lhs <= 1e-12 else float("inf"))
    flagged = rhs <= 1e-300 and lhs > 1e-12
    return lhs, rhs, ratio, flagged
