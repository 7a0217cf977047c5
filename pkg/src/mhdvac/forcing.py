"""Compactly supported interior forcing for scenario runs.

The pulse lives on the fluid side only, vanishes identically near both normal
boundaries, ramps smoothly from zero (zero past data), and leaves the
magnetic-field rows unforced so the linear divergence constraint propagates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solver import Sources
from .state import GridSpec


@dataclass
class PulseSpec:
    """Momentum/entropy forcing only: eliminating the symmetric-form rows
    shows the effective induction source is f_H + H_ring f_q, so forcing the
    total-pressure or magnetic rows would break the divergence constraint."""

    amp: float = 1.0
    t_pulse: float = 0.25
    center: float = 0.75
    width: float = 0.5
    components: tuple = (1, 2, 3, 7)


def make_pulse_source(grid: GridSpec, spec: PulseSpec | None = None) -> Sources:
    spec = spec or PulseSpec()
    x1 = grid.x1_plus()[:, None, None]
    x2 = grid.x2()[None, :, None]
    x3 = grid.x3()[None, None, :]
    r = (x1 - spec.center) / spec.width
    bump = np.where(np.abs(r) < 1.0, (1.0 - r * r) ** 4, 0.0)
    trig = np.cos(2 * np.pi * x2 / grid.L2) * np.cos(2 * np.pi * x3 / grid.L3)
    trig = trig + 0.5 * np.cos(4 * np.pi * x2 / grid.L2 + 1.0)
    profile = spec.amp * bump * trig
    shape = (8, grid.nx1 + 1, grid.nx2, grid.nx3)

    def f(t):
        out = np.zeros(shape)
        if 0.0 < t < spec.t_pulse:
            g = np.sin(np.pi * t / spec.t_pulse) ** 3
            for c in spec.components:
                out[c] = g * profile
        return out

    return Sources(f=f)
