"""Two-dimensional vortex dynamics laboratory.

Finite-difference solvers for the Landau-Lifshitz-Gilbert equation and
the mixed-dynamics complex Ginzburg-Landau equation at small core size
``eps``, together with the limiting point-vortex ODE, topological
diagnostics, and a comparison harness that checks the PDE dynamics
against the ODE as ``eps`` shrinks.
"""

from .diagnostics import (
    ScalarField,
    VortexReading,
    ball_mass,
    energy_density,
    excess_energy,
    identity_residuals,
    locate_vortices,
    planar_jacobian,
    pointwise_jacobian,
    total_energy,
    variational_energy,
    vorticity,
    winding_number,
)
from .fields import (
    ComplexField,
    DirectorField,
    EpsilonSchedule,
    Vortex,
    VortexSet,
    load_field,
    project_unit,
    save_field,
)
from .glmixed import GLConfig, conservation_residuals, gl_run
from .grid import BoundaryKind, Domain, Grid2D, make_grid
from .harness import (
    ComparisonReport,
    ConfigError,
    Scenario,
    compare_tracks,
    run_leg,
    run_scenario,
)
from .llg import LLGConfig, detect_bubbling, llg_run
from .motion import OdeState, QJump, energy_decay_check, ode_integrate, ode_rhs
from .profiles import core_energy_constant, minimizing_profile
from .renorm import (
    RenormalizedEnergyModel,
    canonical_map,
    grad_W,
    renormalized_energy,
    symmetric_disk_model,
)
from .seeding import (
    inject_phase_perturbation,
    seed_bubble_field,
    seed_gl_field,
    seed_vortex_field,
)
from .trajectory import (
    BubblingEvent,
    NumericalError,
    Trajectory,
    load_trajectory,
    save_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryKind",
    "BubblingEvent",
    "ComparisonReport",
    "ComplexField",
    "ConfigError",
    "DirectorField",
    "Domain",
    "EpsilonSchedule",
    "GLConfig",
    "Grid2D",
    "LLGConfig",
    "NumericalError",
    "OdeState",
    "QJump",
    "RenormalizedEnergyModel",
    "ScalarField",
    "Scenario",
    "Trajectory",
    "Vortex",
    "VortexReading",
    "VortexSet",
    "ball_mass",
    "canonical_map",
    "compare_tracks",
    "conservation_residuals",
    "core_energy_constant",
    "detect_bubbling",
    "energy_decay_check",
    "energy_density",
    "excess_energy",
    "gl_run",
    "grad_W",
    "identity_residuals",
    "inject_phase_perturbation",
    "llg_run",
    "load_field",
    "load_trajectory",
    "locate_vortices",
    "make_grid",
    "minimizing_profile",
    "ode_integrate",
    "ode_rhs",
    "planar_jacobian",
    "pointwise_jacobian",
    "project_unit",
    "renormalized_energy",
    "run_leg",
    "run_scenario",
    "save_field",
    "save_trajectory",
    "seed_bubble_field",
    "seed_gl_field",
    "seed_vortex_field",
    "symmetric_disk_model",
    "total_energy",
    "variational_energy",
    "vorticity",
    "winding_number",
]
