# -*- coding: utf-8 -*-
"""
Global systems.

The hybrid schemes have one unknown per cell followed by one unknown per face.
Row ``K`` is the flux balance of cell ``K``, row ``n_cells + σ`` is either the
conservation ``|σ|F_Kσ + |σ|F_Lσ = 0`` of an interior face or the Dirichlet
row ``c_σ = g_σ`` of a boundary face. Every scheme is first described by a
sparse *pair flux operator* mapping the hybrid unknown vector to ``|σ|F_Kσ``
per (cell, face) pair; balance and conservation rows are sums of its rows.

The cell-centered scheme reuses the hybrid numbering for assembly and keeps
only the columns of cell unknowns and boundary face unknowns.
"""

from collections import namedtuple
import logging
import time

import numpy as np
from scipy import sparse
from scipy.io import mmwrite
from scipy.sparse import linalg as spla

from ._compat import bicgstab
from .exceptions import (
    AssemblyError,
    PicardConvergenceError,
    SchemeError,
    SingularMatrixError,
    SolverConvergenceError,
    ZeroPivotError,
)
from .fluxes import (
    BOUNDARY_TREATMENTS,
    CORRECTION_GRADIENTS,
    build_local_operators,
    cell_centered_advection,
    face_velocity,
    two_point_diffusion,
    upwind_gradient_operator,
    vanishing_diffusion,
)
from .hybrid_space import (
    FACE_RULES,
    HybridField,
    cell_averages,
    consistent_gradient,
    evaluate_field,
    face_quadrature,
)
from .mesh import check_alignment, compute_geometry


__all__ = (
    "SCHEMES",
    "SchemeOptions",
    "SparseSystem",
    "CondensedSystem",
    "SolveReport",
    "Solution",
    "ConservationResiduals",
    "assemble_hybrid",
    "assemble_cell_centered",
    "condense",
    "solve",
    "solve_limited",
    "solve_problem",
    "pair_fluxes",
    "conservation_residuals",
    "scheme_data",
)


log = logging.getLogger(__name__)


#: Scheme identifiers.
UPWIND1 = "upwind1"
HYBRID2 = "hybrid2"
LIMITED = "hybrid2-limited"
CELL_CENTERED = "cellcentered2"
SCHEMES = (UPWIND1, HYBRID2, LIMITED, CELL_CENTERED)

_SCHEME_ALIASES = {"hybrid2+limiter": LIMITED}

#: Row roles.
BALANCE = 0
CONSERVATION = 1
BOUNDARY = 2

SOLVERS = ("direct", "iterative")

#: Source samplings: value at the cell centroid or cell average.
SOURCES = ("centroid", "average")

#: Default relative residual tolerances per solver.
DEFAULT_TOL = {"direct": 1e-12, "iterative": 1e-10}


SolveReport = namedtuple(
    "SolveReport",
    [
        "residual",
        "iterations",
        "seconds",
        "n_unknowns",
        "dofs",
        "converged",
        "picard_iterations",
        "phi",
    ],
    defaults=(True, 0, None),
)
SolveReport.__doc__ = """Outcome of a linear (or Picard) solve.

Attributes:
    residual (float): Relative residual ``|Ax - b| / |b|`` of the solved
        system.
    iterations (int): Krylov iterations, ``0`` for the direct solver.
    seconds (float): Wall time.
    n_unknowns (int): Size of the system handed to the solver.
    dofs (int): Size of the uncondensed system.
    converged (bool): Whether the tolerance was met.
    picard_iterations (int): Linear solves done by the limited scheme.
    phi (numpy.ndarray): Final limiter values per cell (limited scheme).
"""


Solution = namedtuple("Solution", ["field", "report", "system", "gradient"])
Solution.__doc__ = """Result of :func:`solve_problem`.

Attributes:
    field (HybridField): Cell and face values.
    report (SolveReport): Solver report.
    system (SparseSystem): Last assembled system.
    gradient (numpy.ndarray): Cell gradient ``(n_cells, dim)`` used for
        output; consistent gradient for hybrid schemes, upwind-valued gradient
        for the cell-centered scheme.
"""


ConservationResiduals = namedtuple(
    "ConservationResiduals", ["balance", "conservation"]
)


class SchemeOptions(object):
    """Discretisation and solver options.

    Args:
        quadrature (str): Face rule for velocities and boundary data.
        vanishing_diffusion (bool): Shift ``Λ_K`` by ``|V(x_K)| h^1.5``.
        correction_gradient (str): Gradient of the second-order correction.
        source (str): ``"centroid"`` samples ``f(x_K)``, ``"average"`` takes
            the cell average.
        cc_boundary (str): Boundary treatment of the cell-centered scheme,
            see :func:`~hybridfv.fluxes.near_boundary_cells`.
        solver (str): ``"direct"`` or ``"iterative"``.
        tol (float): Relative residual tolerance; per-solver default if
            ``None``.
        maxiter (int): Krylov iteration cap.
        condense (bool): Solve hybrid systems through static condensation.
        picard_tol (float): Max-norm increment ending the Picard loop.
        picard_maxiter (int): Picard iteration cap.
        relaxation (float): Picard relaxation factor in ``(0, 1]``.
        force_phi (float): Freeze the limiter to this value.
    """

    defaults = {
        "quadrature": "midpoint",
        "vanishing_diffusion": False,
        "correction_gradient": "consistent",
        "source": "centroid",
        "cc_boundary": "mirror",
        "solver": "direct",
        "tol": None,
        "maxiter": 1000,
        "condense": True,
        "picard_tol": 1e-10,
        "picard_maxiter": 100,
        "relaxation": 1.0,
        "force_phi": None,
    }

    def __init__(self, **options):
        unknown = sorted(set(options) - set(self.defaults))
        if unknown:
            raise SchemeError("Unknown scheme options: {0}".format(", ".join(unknown)))

        for key, value in self.defaults.items():
            setattr(self, key, options.get(key, value))

        if self.quadrature not in FACE_RULES:
            raise SchemeError("Unknown quadrature {0!r}".format(self.quadrature))
        if self.correction_gradient not in CORRECTION_GRADIENTS:
            raise SchemeError(
                "Unknown correction gradient {0!r}".format(self.correction_gradient)
            )
        if self.source not in SOURCES:
            raise SchemeError("Unknown source sampling {0!r}".format(self.source))
        if self.cc_boundary not in BOUNDARY_TREATMENTS:
            raise SchemeError(
                "Unknown cell-centered boundary treatment {0!r}".format(
                    self.cc_boundary
                )
            )
        if self.solver not in SOLVERS:
            raise SchemeError(
                "Unknown solver {0!r}; expected one of {1}".format(self.solver, SOLVERS)
            )
        if not 0.0 < self.relaxation <= 1.0:
            raise SchemeError(
                "Relaxation must be in (0, 1], got {0}".format(self.relaxation)
            )
        if self.force_phi is not None and not 0.0 <= self.force_phi <= 1.0:
            raise SchemeError(
                "Forced limiter must be in [0, 1], got {0}".format(self.force_phi)
            )

    def __repr__(self):  # pragma: no cover
        return "SchemeOptions({0})".format(
            ", ".join(
                "{0}={1!r}".format(key, getattr(self, key)) for key in self.defaults
            )
        )

    @property
    def tolerance(self):
        return DEFAULT_TOL[self.solver] if self.tol is None else self.tol


class SparseSystem(object):
    """Assembled linear system.

    Attributes:
        matrix (scipy.sparse.csr_matrix): System matrix.
        rhs (numpy.ndarray): Right-hand side.
        roles (numpy.ndarray): Row role per row (:data:`BALANCE`,
            :data:`CONSERVATION` or :data:`BOUNDARY`).
        unknowns (numpy.ndarray): Hybrid index (cells first, then faces) of
            every unknown.
        flux_operator (scipy.sparse.csr_matrix): Map from hybrid vectors to
            ``|σ|F_Kσ`` per pair.
        operators (list): Local flux operators (hybrid schemes only).
        face_trace (scipy.sparse.csr_matrix): Map from hybrid vectors to
            interior face values for schemes without interior face unknowns.
    """

    def __init__(
        self,
        matrix,
        rhs,
        roles,
        unknowns,
        geom,
        scheme,
        flux_operator,
        source,
        boundary,
        operators=None,
        face_trace=None,
    ):
        self.matrix = matrix
        self.rhs = rhs
        self.roles = roles
        self.unknowns = unknowns
        self.geom = geom
        self.scheme = scheme
        self.flux_operator = flux_operator
        self.source = source
        self.boundary = boundary
        self.operators = operators
        self.face_trace = face_trace

    def __repr__(self):  # pragma: no cover
        return "<SparseSystem scheme={0} size={1} nnz={2}>".format(
            self.scheme, self.size, self.matrix.nnz
        )

    @property
    def n_cells(self):
        return self.geom.n_cells

    @property
    def n_faces(self):
        return self.geom.n_faces

    @property
    def size(self):
        return self.matrix.shape[0]

    @property
    def dofs(self):
        return self.size

    @property
    def is_hybrid(self):
        return len(self.unknowns) == self.n_cells + self.n_faces

    def expand(self, x):
        """Map a solution vector to a :class:`HybridField`."""
        full = np.zeros(self.n_cells + self.n_faces)
        full[self.unknowns] = x
        if self.face_trace is not None:
            interior = self.n_cells + np.flatnonzero(self.geom.face_pairs[:, 1] >= 0)
            full[interior] = self.face_trace @ full
        return HybridField.from_vector(full, self.n_cells)

    def residual(self, x):
        """Relative residual ``|Ax - b| / |b|`` (absolute if ``b = 0``)."""
        return _relative_residual(self.matrix, x, self.rhs)

    def dump(self, prefix):
        """Write matrix and right-hand side in Matrix Market format.

        Returns:
            tuple: Paths of the matrix and right-hand side files.
        """
        return _dump(prefix, self.matrix, self.rhs)


class CondensedSystem(object):
    """Face-only system left after eliminating the cell unknowns.

    Attributes:
        matrix (scipy.sparse.csr_matrix): ``A_ff - A_fc D⁻¹ A_cf``.
        rhs (numpy.ndarray): ``b_f - A_fc D⁻¹ b_c``.
        parent (SparseSystem): The hybrid system.
        pivots (numpy.ndarray): Diagonal ``D`` of the cell block.
        cell_faces (scipy.sparse.csr_matrix): ``A_cf``; row ``K`` expresses
            ``c_K`` through the face values of ``K``.
    """

    def __init__(self, matrix, rhs, parent, pivots, cell_faces):
        self.matrix = matrix
        self.rhs = rhs
        self.parent = parent
        self.pivots = pivots
        self.cell_faces = cell_faces

    @property
    def n_cells(self):
        return self.parent.n_cells

    @property
    def size(self):
        return self.matrix.shape[0]

    @property
    def dofs(self):
        return self.parent.size

    def back_substitute(self, face_values):
        """Cell values ``D⁻¹ (b_c - A_cf c_f)``."""
        balance = self.parent.rhs[: self.n_cells]
        return (balance - self.cell_faces @ face_values) / self.pivots

    def expand(self, face_values):
        full = np.concatenate([self.back_substitute(face_values), face_values])
        return self.parent.expand(full)

    def residual(self, face_values):
        return _relative_residual(self.matrix, face_values, self.rhs)

    def dump(self, prefix):
        return _dump(prefix, self.matrix, self.rhs)


def scheme_data(mesh, geom, problem, options):
    """Sample problem data on the mesh.

    Returns:
        tuple: ``(tensors, fv, source, boundary)`` with the per-cell
        diffusion tensors (shifted when vanishing diffusion is on), the face
        velocities, the source per cell (centroid value or cell average, see
        ``options.source``) and the face averages of the boundary data on
        boundary faces.
    """
    if problem.dim != mesh.dim:
        raise SchemeError(
            "Problem {0!r} is {1}D but the mesh is {2}D".format(
                problem.name, problem.dim, mesh.dim
            )
        )

    tensors = problem.diffusion.cell_tensors(geom)
    fv = face_velocity(mesh, geom, problem.velocity, options.quadrature)

    if options.vanishing_diffusion:
        velocity = evaluate_field(problem.velocity, geom.cell_centroid, "velocity")
        speed = np.sqrt((np.reshape(velocity, (mesh.n_cells, mesh.dim)) ** 2).sum(1))
        tensors = vanishing_diffusion(tensors, speed, geom.h)

    if options.source == "average":
        source = cell_averages(mesh, geom, problem.source, "source")
    else:
        source = evaluate_field(problem.source, geom.cell_centroid, "source")

    points, weights = face_quadrature(mesh, geom, options.quadrature)
    faces = np.flatnonzero(mesh.boundary_faces)
    values = evaluate_field(
        problem.boundary, points[faces].reshape(-1, mesh.dim), "boundary data"
    )
    boundary = (values.reshape(weights[faces].shape) * weights[faces]).sum(axis=1)

    return tensors, fv, source, (faces, boundary)


def assemble_hybrid(mesh, geom, problem, scheme=HYBRID2, options=None, phi=None):
    """Assemble a hybrid scheme.

    Args:
        scheme (str): ``"upwind1"``, ``"hybrid2"`` or ``"hybrid2-limited"``.
        options (SchemeOptions, optional): Defaults if omitted.
        phi (numpy.ndarray, optional): Limiter values of the linearisation
            (limited scheme). Defaults to ``options.force_phi`` if set, else
            one.

    Returns:
        SparseSystem
    """
    scheme = _scheme_name(scheme)
    if scheme == CELL_CENTERED:
        raise SchemeError("Use assemble_cell_centered for {0!r}".format(scheme))

    options = options or SchemeOptions()
    if scheme == HYBRID2 and options.correction_gradient == "stabilised":
        raise SchemeError(
            "The stabilised correction gradient is anti-diffusive without a "
            "limiter; use it with {0!r}".format(LIMITED)
        )
    tensors, fv, source, boundary = scheme_data(mesh, geom, problem, options)

    if scheme == LIMITED and phi is None and options.force_phi is not None:
        phi = np.full(mesh.n_cells, float(options.force_phi))

    operators = build_local_operators(
        mesh,
        geom,
        tensors,
        fv,
        second_order=scheme != UPWIND1,
        gradient=options.correction_gradient,
        phi=phi if scheme == LIMITED else None,
    )
    return _hybrid_system(geom, scheme, operators, source, boundary)


def assemble_cell_centered(mesh, geom, problem, options=None):
    """Assemble the cell-centered scheme on ``n_cells + n_boundary_faces``
    unknowns.
    """
    options = options or SchemeOptions()
    tensors, fv, source, boundary = scheme_data(mesh, geom, problem, options)

    flux_operator = (
        two_point_diffusion(mesh, geom, tensors)
        + cell_centered_advection(mesh, geom, fv, boundary=options.cc_boundary)
    ).tocsr()

    full, rhs, roles = _rows(geom, flux_operator, source, boundary, conserve=False)

    unknowns = np.concatenate([np.arange(mesh.n_cells), mesh.n_cells + boundary[0]])
    rows = unknowns
    matrix = full[rows][:, unknowns].tocsr()

    # Interior face values: upwind trace of the cell values.
    interior = np.flatnonzero(geom.face_pairs[:, 1] >= 0)
    owner_pair = geom.face_pairs[interior, 0]
    upwind = np.where(
        fv.pair_velocity[owner_pair] > 0.0,
        geom.pair_cell[owner_pair],
        geom.pair_cell[geom.face_pairs[interior, 1]],
    )
    face_trace = sparse.coo_matrix(
        (np.ones(len(interior)), (np.arange(len(interior)), upwind)),
        shape=(len(interior), mesh.n_cells + mesh.n_faces),
    ).tocsr()

    log.debug(
        "Assembled {0}: {1} unknowns, {2} nonzeros".format(
            CELL_CENTERED, matrix.shape[0], matrix.nnz
        )
    )

    return SparseSystem(
        matrix,
        rhs[rows],
        roles[rows],
        unknowns,
        geom,
        CELL_CENTERED,
        flux_operator,
        source,
        boundary,
        face_trace=face_trace,
    )


def condense(system):
    """Eliminate the cell unknowns of a hybrid system.

    Raises:
        AssemblyError: If `system` is not hybrid or its cell block is not
            diagonal.
        ZeroPivotError: With the index of a cell whose balance row has no
            coefficient on its own unknown.
    """
    if not system.is_hybrid:
        raise AssemblyError(
            "Static condensation needs a hybrid system, got {0!r}".format(
                system.scheme
            )
        )

    n = system.n_cells
    A = system.matrix.tocsr()
    cell_block = A[:n, :n].tocsr()
    pivots = cell_block.diagonal()

    off_diagonal = cell_block - sparse.diags(pivots)
    if off_diagonal.count_nonzero():
        raise AssemblyError("Cell block of the hybrid system is not diagonal")

    zero = np.flatnonzero(pivots == 0.0)
    if len(zero):
        raise ZeroPivotError(int(zero[0]))

    cell_faces = A[:n, n:].tocsr()
    face_cells = A[n:, :n].tocsr()
    inverse = sparse.diags(1.0 / pivots)

    matrix = (A[n:, n:] - face_cells @ inverse @ cell_faces).tocsr()
    rhs = system.rhs[n:] - face_cells @ (system.rhs[:n] / pivots)

    log.debug(
        "Condensed {0} unknowns to {1} ({2} nonzeros)".format(
            system.size, matrix.shape[0], matrix.nnz
        )
    )

    return CondensedSystem(matrix, rhs, system, pivots, cell_faces)


def solve(system, options=None):
    """Solve a :class:`SparseSystem` or :class:`CondensedSystem`.

    Returns:
        tuple: ``(HybridField, SolveReport)``.

    Raises:
        SingularMatrixError: If the direct factorisation is singular or
            produces non-finite values.
        SolverConvergenceError: If the iterative solver does not reach the
            tolerance.
    """
    options = options or SchemeOptions()
    tol = options.tolerance
    start = time.perf_counter()

    if options.solver == "direct":
        x, iterations = _solve_direct(system.matrix, system.rhs), 0
    else:
        x, iterations = _solve_iterative(
            system.matrix, system.rhs, tol, options.maxiter
        )

    residual = system.residual(x)
    converged = residual <= tol
    if not converged:
        log.warning(
            "Solve residual {0:.3e} exceeds tolerance {1:.1e}".format(
                residual, tol
            )
        )

    field = system.expand(x)
    seconds = time.perf_counter() - start

    log.debug(
        "Solved {0} unknowns ({1}) residual={2:.3e} in {3:.3f}s".format(
            system.size, options.solver, residual, seconds
        )
    )

    return (
        field,
        SolveReport(residual, iterations, seconds, system.size, system.dofs, converged),
    )


def solve_limited(mesh, geom, problem, options=None):
    """Solve the limited second-order hybrid scheme by Picard iteration.

    The first solve uses ``φ ≡ 1``; every further solve freezes ``φ`` at the
    previous iterate. The loop stops once the max-norm change of the iterate
    is at most ``options.picard_tol``.

    Returns:
        tuple: ``(HybridField, SolveReport)``; the report carries the number
        of linear solves and the final limiter values.

    Raises:
        PicardConvergenceError: After ``options.picard_maxiter`` iterations,
            with the distance between the last two iterates.
    """
    field, report, _ = _picard(mesh, geom, problem, options or SchemeOptions())
    return field, report


def _picard(mesh, geom, problem, options):
    system = assemble_hybrid(mesh, geom, problem, LIMITED, options)
    field, report = _solve_system(system, options)

    if options.force_phi is not None:
        return (
            field,
            report._replace(picard_iterations=1, phi=system_phi(system)),
            system,
        )

    x = field.to_vector()
    distance = np.inf
    seconds = report.seconds

    for iteration in range(1, options.picard_maxiter + 1):
        operators = [op.recompute(x) for op in system.operators]
        system = _hybrid_system(
            geom, LIMITED, operators, system.source, system.boundary
        )
        field, report = _solve_system(system, options)
        seconds += report.seconds

        x_new = field.to_vector()
        if options.relaxation < 1.0:
            x_new = options.relaxation * x_new + (1.0 - options.relaxation) * x
        distance = float(np.abs(x_new - x).max())
        x = x_new

        log.debug("Picard iteration {0}: distance {1:.3e}".format(iteration, distance))

        if distance <= options.picard_tol:
            report = report._replace(
                residual=system.residual(x),
                seconds=seconds,
                picard_iterations=iteration + 1,
                phi=system_phi(system),
            )
            return HybridField.from_vector(x, mesh.n_cells), report, system

    raise PicardConvergenceError(distance, options.picard_maxiter)


def solve_problem(mesh, problem, scheme=HYBRID2, options=None, geom=None):
    """Assemble and solve `problem` with `scheme` on `mesh`.

    Returns:
        Solution
    """
    scheme = _scheme_name(scheme)
    options = options or SchemeOptions()
    if geom is None:
        geom = compute_geometry(mesh)

    if problem.interfaces:
        straddling = check_alignment(mesh, problem.interfaces)
        if len(straddling):
            log.warning(
                "{0} cells straddle the coefficient interfaces of {1!r}; results "
                "are unreliable".format(len(straddling), problem.name)
            )

    if scheme == LIMITED:
        field, report, system = _picard(mesh, geom, problem, options)
    elif scheme == CELL_CENTERED:
        system = assemble_cell_centered(mesh, geom, problem, options)
        field, report = solve(system, options)
    else:
        system = assemble_hybrid(mesh, geom, problem, scheme, options)
        field, report = _solve_system(system, options)

    if scheme == CELL_CENTERED:
        fv = face_velocity(mesh, geom, problem.velocity, options.quadrature)
        gradient = (
            upwind_gradient_operator(mesh, geom, fv) @ field.to_vector()
        ).reshape(mesh.n_cells, mesh.dim)
    else:
        gradient = consistent_gradient(mesh, geom, field)

    return Solution(field, report, system, gradient)


def pair_fluxes(system, x):
    """Return ``|σ| F_Kσ`` per pair for a hybrid vector or field `x`."""
    if isinstance(x, HybridField):
        x = x.to_vector()
    return system.flux_operator @ np.asarray(x, dtype=float)


def conservation_residuals(system, x):
    """Discrete balance and conservation residuals at `x`.

    Returns:
        ConservationResiduals: ``balance`` is ``sum |σ|F_Kσ - |K| f_K`` per
        cell, ``conservation`` is ``|σ|(F_Kσ + F_Lσ)`` per interior face.
    """
    geom = system.geom
    fluxes = pair_fluxes(system, x)
    balance = np.bincount(geom.pair_cell, fluxes, geom.n_cells) - (
        geom.cell_measure * system.source
    )
    interior = geom.face_pairs[geom.face_pairs[:, 1] >= 0]
    return ConservationResiduals(
        balance, fluxes[interior[:, 0]] + fluxes[interior[:, 1]]
    )


def system_phi(system):
    """Limiter values per cell of a hybrid system."""
    phi = np.ones(system.n_cells)
    for op in system.operators or ():
        phi[op.group.cells] = op.phi
    return phi


def _scheme_name(scheme):
    scheme = _SCHEME_ALIASES.get(scheme, scheme)
    if scheme not in SCHEMES:
        raise SchemeError(
            "Unknown scheme {0!r}; expected one of {1}".format(scheme, SCHEMES)
        )
    return scheme


def _hybrid_system(geom, scheme, operators, source, boundary):
    rows, cols, data = [], [], []
    for op in operators:
        m, n = op.group.pairs.shape
        rows.append(np.broadcast_to(op.group.pairs[:, :, None], (m, n, n + 1)).ravel())
        cols.append(np.broadcast_to(op.dofs[:, None, :], (m, n, n + 1)).ravel())
        data.append(op.matrix.ravel())

    flux_operator = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(geom.n_pairs, geom.n_cells + geom.n_faces),
    ).tocsr()

    matrix, rhs, roles = _rows(geom, flux_operator, source, boundary, conserve=True)
    unknowns = np.arange(geom.n_cells + geom.n_faces)

    log.debug(
        "Assembled {0}: {1} unknowns, {2} nonzeros".format(
            scheme, matrix.shape[0], matrix.nnz
        )
    )

    return SparseSystem(
        matrix,
        rhs,
        roles,
        unknowns,
        geom,
        scheme,
        flux_operator,
        source,
        boundary,
        operators,
    )


def _rows(geom, flux_operator, source, boundary, conserve):
    """Balance, conservation and Dirichlet rows in hybrid numbering."""
    n_cells, n_faces = geom.n_cells, geom.n_faces
    n = n_cells + n_faces
    pairs = np.arange(geom.n_pairs)
    faces, values = boundary

    gather_rows = [geom.pair_cell]
    gather_cols = [pairs]
    if conserve:
        interior = geom.pair_twin >= 0
        gather_rows.append(n_cells + geom.pair_face[interior])
        gather_cols.append(pairs[interior])

    gather = sparse.coo_matrix(
        (
            np.ones(sum(len(r) for r in gather_rows)),
            (np.concatenate(gather_rows), np.concatenate(gather_cols)),
        ),
        shape=(n, geom.n_pairs),
    ).tocsr()
    dirichlet = sparse.coo_matrix(
        (np.ones(len(faces)), (n_cells + faces, n_cells + faces)), shape=(n, n)
    )
    matrix = (gather @ flux_operator + dirichlet).tocsr()

    rhs = np.zeros(n)
    rhs[:n_cells] = geom.cell_measure * source
    rhs[n_cells + faces] = values

    roles = np.full(n, CONSERVATION, dtype=np.int8)
    roles[:n_cells] = BALANCE
    roles[n_cells + faces] = BOUNDARY
    return matrix, rhs, roles


def _solve_system(system, options):
    """Solve a hybrid system, condensed unless disabled."""
    if options.condense:
        return solve(condense(system), options)
    return solve(system, options)


def _solve_direct(matrix, rhs):
    try:
        lu = spla.splu(sparse.csc_matrix(matrix))
    except RuntimeError as ex:
        raise SingularMatrixError("Direct factorisation failed: {0}".format(ex))

    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("Direct solve produced non-finite values")
    return x


def _solve_iterative(matrix, rhs, tol, maxiter):
    matrix = sparse.csc_matrix(matrix)
    try:
        ilu = spla.spilu(matrix)
    except RuntimeError as ex:
        raise SingularMatrixError("Incomplete factorisation failed: {0}".format(ex))

    preconditioner = spla.LinearOperator(matrix.shape, ilu.solve)
    history = []
    x, info = bicgstab(
        matrix,
        rhs,
        rtol=tol,
        maxiter=maxiter,
        M=preconditioner,
        callback=lambda xk: history.append(1),
    )

    if info != 0 or not np.all(np.isfinite(x)):
        raise SolverConvergenceError(
            _relative_residual(matrix, np.nan_to_num(x), rhs), len(history)
        )
    return x, len(history)


def _relative_residual(matrix, x, rhs):
    norm = np.linalg.norm(rhs)
    residual = np.linalg.norm(matrix @ x - rhs)
    return float(residual / norm) if norm > 0.0 else float(residual)


def _dump(prefix, matrix, rhs):
    matrix_path = "{0}.mtx".format(prefix)
    rhs_path = "{0}_rhs.mtx".format(prefix)
    mmwrite(matrix_path, sparse.coo_matrix(matrix))
    mmwrite(rhs_path, np.asarray(rhs).reshape(-1, 1))
    return matrix_path, rhs_path
