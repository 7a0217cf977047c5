"""Numerical laboratory for the linearized compressible-MHD / vacuum-Maxwell
free-interface problem with surface tension on fixed half-spaces."""

from .state import (
    EosModel,
    FluidState,
    GridSpec,
    NonHyperbolicState,
    PhysicsParams,
    VacuumState,
    check_hyperbolicity,
    eos_eval,
)
from .geometry import InterfaceField, LiftDerivatives, cutoff_chi, lift_Phi
from .operators import BasicState, Perturbation, RingWorkspace
from .rings import PRESETS, make_ring
from .solver import RunArtifact, SolverConfig, Sources, UnstableRun, run_simulation
from .modes import ModeSpec, frozen_mode_growth, growth_scan

__version__ = "0.1.0"

__all__ = [
    "BasicState",
    "EosModel",
    "FluidState",
    "GridSpec",
    "InterfaceField",
    "LiftDerivatives",
    "ModeSpec",
    "NonHyperbolicState",
    "PRESETS",
    "Perturbation",
    "PhysicsParams",
    "RingWorkspace",
    "RunArtifact",
    "SolverConfig",
    "Sources",
    "UnstableRun",
    "VacuumState",
    "check_hyperbolicity",
    "cutoff_chi",
    "eos_eval",
    "frozen_mode_growth",
    "growth_scan",
    "lift_Phi",
    "make_ring",
    "run_simulation",
]
