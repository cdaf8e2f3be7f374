"""Compactly supported uniformly rotating 2D Euler flows.

Construction by gluing radial bumps to the exterior rigid-rotation stream
profile, pointwise verification of the rotating-solution equation,
pseudo-spectral evolution of the vorticity, and radial-symmetry rigidity
diagnostics.
"""

__version__ = "0.1.0"

from .composer import (
    AnalyticField,
    Bump,
    FieldSample,
    FlowSpec,
    FlowSpecError,
    ImportedFlow,
    ImportedMap,
    check_locally_radial,
    omega_bounds_check,
    residual_rotating,
    velocity,
    vorticity,
)
from .profiles import (
    BumpProfile,
    RadialIvpError,
    RadialIvpProblem,
    RadialProfile,
    TabulatedProfile,
    cutoff_eval,
    cutoff_jet,
    solve_radial_ivp,
)
from .spectral import (
    SolverConfig,
    SolverError,
    SpectralGrid,
    VorticityState,
    rotate_reference,
    velocity_from_vorticity,
)

__all__ = [
    "AnalyticField",
    "Bump",
    "BumpProfile",
    "FieldSample",
    "FlowSpec",
    "FlowSpecError",
    "ImportedFlow",
    "ImportedMap",
    "RadialIvpError",
    "RadialIvpProblem",
    "RadialProfile",
    "SolverConfig",
    "SolverError",
    "SpectralGrid",
    "TabulatedProfile",
    "VorticityState",
    "check_locally_radial",
    "cutoff_eval",
    "cutoff_jet",
    "omega_bounds_check",
    "residual_rotating",
    "rotate_reference",
    "solve_radial_ivp",
    "velocity",
    "velocity_from_vorticity",
    "vorticity",
    "__version__",
]
