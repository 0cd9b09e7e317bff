"""Plane-wave least-squares solver for 3D time-harmonic Maxwell equations.

A Trefftz method on uniform hexahedral meshes: each element carries a
basis of propagating plane waves, and the discrete field minimizes a
weighted least-squares functional of boundary-impedance and interface
jump residuals.  The resulting linear system is Hermitian positive
definite.  Supports homogeneous and layered (piecewise-constant)
permittivity, with penalty weights adapted to the material contrast.
"""

from .mesh import Box, Element, Face, Mesh, build_uniform_mesh, mesh_vertices
from .material import MaterialField, PenaltyWeights, penalty_parameters
from .planewave import DirectionSet, PWBasis, basis_for_element, direction_set, polarization
from .assembly import (
    HermitianBlockSystem,
    QuadRule,
    assemble_system,
    default_quadrature_order,
    face_quadrature,
    functional_J,
    trace_quantities,
)
from .solver import SolveOptions, SolveReport, residual_norm, solve
from .reference import (
    DipoleParams,
    ExactField,
    dipole_field,
    impedance_trace_g,
    make_dipole_field,
    make_trig_field,
    relative_l2_error,
    trig_field,
    vertex_error,
)
from .runner import (
    ExperimentConfig,
    ResultRow,
    SolutionRecord,
    emit_csv,
    load_solution,
    parse_config,
    run_experiment,
    save_solution,
)

__version__ = "0.1.0"

__all__ = [
    "Box", "Element", "Face", "Mesh", "build_uniform_mesh", "mesh_vertices",
    "MaterialField", "PenaltyWeights", "penalty_parameters",
    "DirectionSet", "PWBasis", "basis_for_element", "direction_set", "polarization",
    "HermitianBlockSystem", "QuadRule", "assemble_system", "default_quadrature_order",
    "face_quadrature", "functional_J", "trace_quantities",
    "SolveOptions", "SolveReport", "residual_norm", "solve",
    "DipoleParams", "ExactField", "dipole_field", "impedance_trace_g",
    "make_dipole_field", "make_trig_field", "relative_l2_error", "trig_field",
    "vertex_error",
    "ExperimentConfig", "ResultRow", "SolutionRecord", "emit_csv", "load_solution",
    "parse_config", "run_experiment", "save_solution",
    "__version__",
]
