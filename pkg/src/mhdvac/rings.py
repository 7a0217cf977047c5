"""Named background ("ring") state recipes.

Each recipe produces a steady admissible BasicState: hyperbolic everywhere,
front amplitude within bounds, kinematic and jump conditions satisfied on the
interface, H.N = h.N = 0 there, and the background induction/Faraday
equations satisfied (profiles vary along x1 only, or the fields are constant
when the front is curved).
"""

from __future__ import annotations

import numpy as np

from .geometry import InterfaceField
from .operators import BasicState
from .state import EosModel, FluidState, GridSpec, PhysicsParams, VacuumState

PRESETS = ("trivial", "curved", "shear", "tangentialH", "bigE", "mixed")


def _profile(x1, kind="crest"):
    """Smooth x1 profiles on [0, L1] (fluid) or [-L1, 0] (vacuum)."""
    r = np.abs(x1) / np.max(np.abs(x1))
    if kind == "crest":  # maximal at the interface, flat at the far end
        return 0.5 * (1.0 + np.cos(np.pi * r))
    if kind == "rise":  # zero at the interface with nonzero slope
        return np.sin(np.pi * r) * (1.0 - r)
    raise ValueError(kind)


def make_ring(
    name: str,
    grid: GridSpec,
    eos: EosModel | None = None,
    params: PhysicsParams | None = None,
    **kw,
) -> BasicState:
    """Build a preset background by name; numeric knobs via keyword arguments."""
    eos = eos or EosModel()
    params = params or PhysicsParams()
    if name not in PRESETS:
        raise ValueError(f"unknown ring preset {name!r}; choose from {PRESETS}")
    shape = (grid.nx1 + 1, grid.nx2, grid.nx3)
    x1p = grid.x1_plus()[:, None, None]
    x1m = grid.x1_minus()[:, None, None]
    x2 = grid.x2()[:, None]
    x3 = grid.x3()[None, :]
    zeros = np.zeros(shape)
    q0 = kw.get("q0", 1.0)

    U = FluidState.constant(q=q0, v=(0, 0, 0), H=(0, 0, 0), S=0.0, shape=shape)
    V = VacuumState.constant(h=(0, 0, 0), E=(0, 0, 0), shape=shape)
    phi = InterfaceField.zero(grid)

    if name == "curved":
        amp = kw.get("phi_amp", 0.1)
        phi.phi = amp * np.cos(2 * np.pi * x2 / grid.L2) * np.cos(2 * np.pi * x3 / grid.L3)
    elif name == "shear":
        va = kw.get("v_amp", 0.5)
        U.v[1] = va * _profile(x1p, "crest") + zeros
    elif name == "tangentialH":
        Ha = kw.get("H_amp", 1.0)
        ha = kw.get("h_amp", 1.0)
        U.H[1] = Ha + zeros
        V.h[2] = ha + zeros
    elif name == "bigE":
        # strong enough to destabilize every wavenumber at zero tension, weak
        # enough that s = 0.1 caps the growth inside the scanned decade
        Ea = kw.get("E_amp", 1.2)
        Ha = kw.get("H_amp", 0.5)
        U.H[1] = Ha + zeros
        V.E[0] = Ea + zeros
    elif name == "mixed":
        U.q = q0 + kw.get("q_amp", 0.2) * np.sin(np.pi * x1p / grid.L1) + zeros
        U.v[1] = kw.get("v_amp", 0.3) * _profile(x1p, "crest") + zeros
        U.H[1] = kw.get("H_amp", 0.4) * _profile(x1p, "crest") + zeros
        U.H[2] = kw.get("H3", 0.2) + zeros
        V.h[1] = kw.get("h_amp", 0.3) * _profile(x1m, "crest") + zeros
        V.h[2] = kw.get("h3", -0.2) + zeros
        V.E[0] = kw.get("E_amp", 0.8) + zeros
    ring = BasicState(grid=grid, eos=eos, params=params, U=U, V=V, phi=phi)
    return ring.validate()
