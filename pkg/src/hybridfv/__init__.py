# -*- coding: utf-8 -*-
"""Hybridfv module."""

from .__version__ import __version__

from .mesh import (
    PolyMesh,
    GeometryCache,
    build_cartesian,
    build_triangular,
    build_interval,
    build_kershaw,
    build_family,
    perturb_mesh,
    compute_geometry,
    regularity,
    check_alignment,
    read_mesh,
    write_mesh,
)

from .hybrid_space import (
    HybridField,
    interpolate,
    consistent_gradient,
    stabilisation,
    gradients,
    reconstruct,
    norm_l2,
    norm_h1_like,
)

from .fluxes import (
    FaceVelocity,
    DiffusionTensorField,
    LocalFluxOperator,
    face_velocity,
    diffusion_local_operator,
    advective_upwind_hybrid,
    advective_second_order_hybrid,
    advective_cell_centered,
    limiter_phi,
    vanishing_diffusion,
)

from .assembly import (
    SchemeOptions,
    SparseSystem,
    CondensedSystem,
    SolveReport,
    assemble_hybrid,
    assemble_cell_centered,
    condense,
    solve,
    solve_limited,
    solve_problem,
    pair_fluxes,
    conservation_residuals,
)

from .problems import (
    ProblemSpec,
    make_problem,
    problem_eps_1d,
    problem_smooth_2d,
    problem_boundary_layer_2d,
    problem_hetero_rotation,
    error_metrics,
    overshoot,
    observed_order,
)

from .study import StudyConfig, StudyResult, run_study, paper_suite

from .exceptions import (
    HybridFVError,
    MeshError,
    MeshInputError,
    DegenerateCellError,
    PerturbationError,
    MeshFormatError,
    FieldError,
    InterpolationError,
    SchemeError,
    TensorError,
    FluxContractError,
    AssemblyError,
    ZeroPivotError,
    SolverError,
    SingularMatrixError,
    SolverConvergenceError,
    PicardConvergenceError,
    ProblemError,
    ConfigError,
)

# Set default logging handler to avoid "No handler found" warnings.
import logging

logging.getLogger(__name__).addHandler(logging.NullHandler())
