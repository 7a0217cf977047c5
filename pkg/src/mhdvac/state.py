"""Physical state vectors, polytropic equation of state, grids.

Component ordering used throughout: the fluid unknown is
(q, v1, v2, v3, H1, H2, H3, S) and the vacuum unknown is
(h1, h2, h3, E1, E2, E3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


class NonHyperbolicState(ValueError):
    """Fluid state violates the hyperbolicity conditions (derived p <= 0)."""


@dataclass(frozen=True)
class EosModel:
    """Polytropic state law rho(p, S) = (p / A(S))**(1/gamma), A(S) = exp(S * entropy_scale).

    The sound speed is a = (d rho/d p)**(-1/2) = sqrt(gamma p / rho), so
    rho * a**2 = gamma * p.  Both rho and a are positive exactly when p > 0.
    """

    gamma: float = 5.0 / 3.0
    entropy_scale: float = 1.0

    def A(self, S):
        return np.exp(S * self.entropy_scale)

    def rho(self, p, S):
        return (p / self.A(S)) ** (1.0 / self.gamma)

    def rho_p(self, p, S):
        return self.rho(p, S) / (self.gamma * p)

    def rho_S(self, p, S):
        return -self.rho(p, S) * self.entropy_scale / self.gamma

    def sound_speed(self, p, S):
        return np.sqrt(self.gamma * p / self.rho(p, S))


def eos_eval(p, S, eos: EosModel):
    """Evaluate (rho, a) at pressure p and entropy S.  Requires p > 0."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0):
        raise ValueError("eos_eval: pressure must be positive")
    rho = eos.rho(p, S)
    return rho, np.sqrt(eos.gamma * p / rho)


@dataclass
class FluidState:
    """Fluid unknown U = (q, v, H, S) on a point or a grid.

    q and S have an arbitrary common shape; v and H carry a leading length-3
    axis over that shape.
    """

    q: np.ndarray
    v: np.ndarray
    H: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.S = np.asarray(self.S, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.H = np.asarray(self.H, dtype=float)
        if self.v.shape[0] != 3 or self.H.shape[0] != 3:
            raise ValueError("v and H must have a leading axis of length 3")

    @property
    def shape(self):
        return self.q.shape

    def pressure(self):
        """Derived pressure p = q - |H|^2 / 2."""
        return self.q - 0.5 * np.sum(self.H * self.H, axis=0)

    def as_vector(self):
        """Stack into an 8-component array (component axis first)."""
        return np.concatenate(
            [self.q[None], self.v, self.H, self.S[None]], axis=0
        )

    @staticmethod
    def from_vector(u):
        return FluidState(q=u[0], v=u[1:4], H=u[4:7], S=u[7])

    @staticmethod
    def constant(q, v, H, S, shape=()):
        one = np.ones(shape)
        return FluidState(
            q=q * one,
            v=np.stack([c * one for c in v]),
            H=np.stack([c * one for c in H]),
            S=S * one,
        )


@dataclass
class VacuumState:
    """Vacuum unknown V = (h, E); components are finite, no sign constraints."""

    h: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        self.E = np.asarray(self.E, dtype=float)
        if self.h.shape[0] != 3 or self.E.shape[0] != 3:
            raise ValueError("h and E must have a leading axis of length 3")

    @property
    def shape(self):
        return self.h.shape[1:]

    def as_vector(self):
        return np.concatenate([self.h, self.E], axis=0)

    @staticmethod
    def from_vector(w):
        return VacuumState(h=w[0:3], E=w[3:6])

    @staticmethod
    def constant(h, E, shape=()):
        one = np.ones(shape)
        return VacuumState(
            h=np.stack([c * one for c in h]),
            E=np.stack([c * one for c in E]),
        )


def check_hyperbolicity(U: FluidState, eos: EosModel) -> bool:
    """True iff the derived pressure is positive everywhere.

    Under the polytropic law p > 0 forces rho > 0 and rho_p > 0, which is
    exactly the positivity of the fluid symmetrizer.
    """
    del eos  # the gate is EOS-independent for the polytropic family
    return bool(np.all(U.pressure() > 0.0))


@dataclass(frozen=True)
class PhysicsParams:
    """Speed ratio epsilon (0 < eps <= 0.5) and surface tension s_tension >= 0."""

    epsilon: float = 0.1
    s_tension: float = 0.1

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.epsilon > 0.5:
            raise ValueError("epsilon must be at most 0.5")
        if self.s_tension < 0.0:
            raise ValueError("surface tension must be nonnegative")


@dataclass(frozen=True)
class GridSpec:
    """Truncated half-space grids.

    The fluid side is the node grid {j*h1 : j=0..nx1} on [0, L1], the vacuum
    side its mirror on [-L1, 0]; both share the interface plane x1 = 0.  The
    tangential directions are periodic with nx2 x nx3 points.  dt, when given,
    must satisfy the CFL bound checked by the solver (cfl <= 0.4 against the
    fastest speed, which is the vacuum light speed 1/epsilon).
    """

    nx1: int
    nx2: int
    nx3: int
    L1: float = 4.0
    L2: float = TWO_PI
    L3: float = TWO_PI
    dt: float | None = None

    def __post_init__(self):
        for name in ("nx1", "nx2", "nx3"):
            if getattr(self, name) < 4:
                raise ValueError(f"{name} must be at least 4")
        if self.L1 <= 0 or self.L2 <= 0 or self.L3 <= 0:
            raise ValueError("domain lengths must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def h1(self):
        return self.L1 / self.nx1

    @property
    def h2(self):
        return self.L2 / self.nx2

    @property
    def h3(self):
        return self.L3 / self.nx3

    def x1_plus(self):
        return np.linspace(0.0, self.L1, self.nx1 + 1)

    def x1_minus(self):
        return np.linspace(-self.L1, 0.0, self.nx1 + 1)

    def x2(self):
        return np.arange(self.nx2) * self.h2

    def x3(self):
        return np.arange(self.nx3) * self.h3

    def refined(self, factor: int) -> "GridSpec":
        return GridSpec(
            nx1=self.nx1 * factor,
            nx2=self.nx2 * factor,
            nx3=self.nx3 * factor,
            L1=self.L1,
            L2=self.L2,
            L3=self.L3,
            dt=None if self.dt is None else self.dt / factor,
        )
