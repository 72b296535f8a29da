"""LDDMM landmark registration with residual-corrected symmetries and pole ladder transport."""
from .diagnostics import (ErrorReport, centrality_error, evaluate_cell, inverse_consistency_error,
                          involutivity_error, midpoint_distance_error, run_suite, shape_rms,
                          transvectivity_error)
from .exceptions import (DegenerateNeighborhood, LengthMismatch, NonFiniteState, ParseError,
                         ShapeMismatch)
from .geodesics import ControlSystem, GeodesicTrajectory, exponential, flow_points, hamiltonian_energy, shoot
from .kernel import KernelParams, eval_kernel, eval_velocity, grad1_kernel, hilbert_product
from .mesh import Mesh, load_mesh, save_mesh
from .registration import (RegistrationConfig, RegistrationResult, criterion, criterion_gradient,
                           register, residual)
from .strain import area_strain_error, local_area_strain, triangle_areas
from .symmetric import SymmetryOutcome, Variant, midpoint, symmetry
from .synthetic import PopulationConfig, generate_synthetic_population
from .transport import fanning_transport, pole_ladder

__all__ = [
    "ControlSystem", "DegenerateNeighborhood", "ErrorReport", "GeodesicTrajectory", "KernelParams",
    "LengthMismatch", "Mesh", "NonFiniteState", "ParseError", "PopulationConfig",
    "RegistrationConfig", "RegistrationResult", "ShapeMismatch", "SymmetryOutcome", "Variant",
    "area_strain_error", "centrality_error", "criterion", "criterion_gradient", "eval_kernel",
    "eval_velocity", "evaluate_cell", "exponential", "fanning_transport", "flow_points",
    "generate_synthetic_population", "grad1_kernel", "hamiltonian_energy", "hilbert_product",
    "inverse_consistency_error", "involutivity_error", "load_mesh", "local_area_strain",
    "midpoint", "midpoint_distance_error", "pole_ladder", "register", "residual", "run_suite",
    "save_mesh", "shape_rms", "shoot", "symmetry", "transvectivity_error", "triangle_areas",
]
