# -*- coding: utf-8 -*-
"""
Local flux operators.

Every hybrid flux ``|σ| F_Kσ`` is a linear function of the local unknown
vector ``(c_K, c_σ1, ..., c_σn)`` of its cell. For a group of cells with the
same face count these maps are stored as dense arrays of shape
``(m, n, n + 1)``: row ``j`` gives the flux through the ``j``-th face.

Diffusive fluxes follow the hybrid mimetic construction: the block ``M``
satisfies ``sum_σ (M c)_σ (v_K - v_σ) = sum_σ |D_Kσ| Λ_K ∇_D c · ∇_D v`` with
``∇_D`` the stabilised gradient, which gives ``M = -A[1:, :]`` for the local
stiffness matrix ``A``.

Advective fluxes use the splitting ``V = V⁺ - V⁻``. The first-order hybrid
flux is ``c_K V⁺ - c_σ V⁻``; the second-order flux adds
``φ_K (∇̃c_K · (x_σ - x_K)) V⁺`` with ``φ_K`` a limiter value (one for the
unlimited scheme). The cell-centered comparison scheme reconstructs face
values from an upwind-valued cell gradient and is assembled as a sparse
operator over the global unknowns instead.
"""

import logging

import numpy as np
from scipy import sparse

from .exceptions import FluxContractError, SchemeError, TensorError
from .hybrid_space import face_averages, local_gradient_operators
from .mesh import CellGroup


__all__ = (
    "FaceVelocity",
    "DiffusionTensorField",
    "LocalFluxOperator",
    "face_velocity",
    "check_tensors",
    "vanishing_diffusion",
    "diffusion_blocks",
    "upwind_blocks",
    "reconstruction_increments",
    "build_local_operators",
    "diffusion_local_operator",
    "advective_upwind_hybrid",
    "advective_second_order_hybrid",
    "barth_jespersen",
    "limiter_phi",
    "near_boundary_cells",
    "upwind_gradient_operator",
    "cell_centered_advection",
    "advective_cell_centered",
    "two_point_diffusion",
)


log = logging.getLogger(__name__)


#: Gradients available for the second-order correction term.
CORRECTION_GRADIENTS = ("consistent", "stabilised")
DEFAULT_CORRECTION_GRADIENT = "consistent"

#: Boundary treatments of the cell-centered scheme.
BOUNDARY_TREATMENTS = ("mirror", "inflow", "boundary")
DEFAULT_BOUNDARY_TREATMENT = "mirror"

#: Exponent of the mesh size in the vanishing-diffusion shift.
VANISHING_EXPONENT = 1.5

# Relative symmetry tolerance for diffusion tensors.
SYMMETRY_TOL = 1e-14


class FaceVelocity(object):
    """Normal velocity averages.

    The flux is stored once per face, oriented outward from the face owner,
    and negated for the neighbor, so ``V_Kσ + V_Lσ = 0`` holds exactly.

    Args:
        geom (GeometryCache): Geometry the velocities belong to.
        face_flux (numpy.ndarray): Owner-oriented normal velocity per face.
    """

    def __init__(self, geom, face_flux):
        self.face_flux = np.asarray(face_flux, dtype=float)
        self.pair_velocity = geom.pair_sign * self.face_flux[geom.pair_face]

    @property
    def plus(self):
        """``V⁺ = max(V, 0)`` per pair."""
        return np.maximum(self.pair_velocity, 0.0)

    @property
    def minus(self):
        """``V⁻ = max(-V, 0)`` per pair."""
        return np.maximum(-self.pair_velocity, 0.0)


class DiffusionTensorField(object):
    """Symmetric positive definite tensor field.

    Args:
        evaluator (callable): Maps points ``(N, dim)`` to tensors
            ``(N, dim, dim)``.
        bounds (tuple, optional): Declared eigenvalue range
            ``(lower, upper)``; checked when sampling if given.
    """

    def __init__(self, evaluator, bounds=None):
        self.evaluator = evaluator
        self.bounds = bounds

    def __call__(self, points):
        return self.evaluator(points)

    def sample(self, points):
        """Evaluate and validate tensors at `points`."""
        points = np.asarray(points, dtype=float)
        dim = points.shape[1]
        tensors = np.asarray(self.evaluator(points), dtype=float).reshape(
            len(points), dim, dim
        )
        check_tensors(tensors, self.bounds)
        return tensors

    def cell_tensors(self, geom):
        """Tensors ``Λ_K`` sampled at the cell centroids."""
        return self.sample(geom.cell_centroid)


class LocalFluxOperator(object):
    """Flux maps of one :class:`~hybridfv.mesh.CellGroup`.

    Attributes:
        group (CellGroup): Cells covered by this operator.
        dofs (numpy.ndarray): Global unknown indices of the local vectors,
            shape ``(m, n + 1)``.
        diffusive (numpy.ndarray): Diffusive flux rows ``(m, n, n + 1)``.
        upwind (numpy.ndarray): First-order advective rows.
        increments (numpy.ndarray): Reconstruction increments
            ``∇̃c_K·(x_σ - x_K)`` as rows, or ``None`` for first-order only.
        outflow (numpy.ndarray): ``|σ| V⁺`` per local face.
        phi (numpy.ndarray): Limiter value per cell scaling the correction.
    """

    def __init__(
        self, group, dofs, diffusive, upwind, increments=None, outflow=None, phi=None
    ):
        self.group = group
        self.dofs = dofs
        self.diffusive = diffusive
        self.upwind = upwind
        self.increments = increments
        self.outflow = outflow

        if phi is None:
            phi = np.ones(len(group.cells))
        self.phi = np.asarray(phi, dtype=float)

    @property
    def correction(self):
        if self.increments is None:
            return np.zeros_like(self.upwind)
        return self.outflow[:, :, None] * self.increments

    @property
    def advective(self):
        if self.increments is None:
            return self.upwind
        return self.upwind + self.phi[:, None, None] * self.correction

    @property
    def matrix(self):
        """Total flux rows ``|σ|(F^D + F^A)``."""
        return self.diffusive + self.advective

    def local_values(self, x):
        return np.asarray(x)[self.dofs]

    def fluxes(self, x):
        """Evaluate ``|σ| F_Kσ`` for the global unknown vector `x`."""
        return np.einsum("mjk,mk->mj", self.matrix, self.local_values(x))

    def with_phi(self, phi):
        """Return copy with limiter values `phi`."""
        return LocalFluxOperator(
            self.group,
            self.dofs,
            self.diffusive,
            self.upwind,
            self.increments,
            self.outflow,
            phi,
        )

    def recompute(self, x):
        """Return copy with limiter values evaluated at the iterate `x`."""
        if self.increments is None:
            return self
        values = self.local_values(x)
        deltas = np.einsum("mjk,mk->mj", self.increments, values)
        return self.with_phi(barth_jespersen(values, deltas))


def face_velocity(mesh, geom, velocity, quadrature="midpoint"):
    """Average normal velocities over the faces.

    Args:
        velocity (callable): Maps points ``(N, dim)`` to vectors
            ``(N, dim)``.
        quadrature (str): ``"midpoint"`` (default) or ``"gauss2"``.

    Returns:
        FaceVelocity
    """
    averages = face_averages(mesh, geom, velocity, quadrature, "velocity")
    averages = np.asarray(averages).reshape(mesh.n_faces, mesh.dim)
    return FaceVelocity(geom, (averages * geom.face_normal).sum(axis=1))


def check_tensors(tensors, bounds=None):
    """Validate a stack of tensors ``(N, dim, dim)``.

    Raises:
        TensorError: With the index of the first tensor that is not
            symmetric, not positive definite or outside `bounds`.
    """
    tensors = np.asarray(tensors, dtype=float)
    scale = np.abs(tensors).max(axis=(1, 2))
    asym = np.abs(tensors - tensors.transpose(0, 2, 1)).max(axis=(1, 2))
    bad = np.flatnonzero(asym > SYMMETRY_TOL * np.maximum(scale, 1.0))
    if len(bad):
        raise TensorError(int(bad[0]), "Diffusion tensor is not symmetric")

    eigenvalues = np.linalg.eigvalsh(tensors)
    bad = np.flatnonzero(~(eigenvalues[:, 0] > 0.0))
    if len(bad):
        raise TensorError(int(bad[0]), "Diffusion tensor is not positive definite")

    if bounds is not None:
        lower, upper = bounds
        tol = 1e-12 * max(abs(lower), abs(upper))
        bad = np.flatnonzero(
            (eigenvalues[:, 0] < lower - tol) | (eigenvalues[:, -1] > upper + tol)
        )
        if len(bad):
            raise TensorError(
                int(bad[0]),
                "Eigenvalues outside the declared range [{0}, {1}]".format(
                    lower, upper
                ),
            )

    return tensors


def vanishing_diffusion(tensors, speed, h):
    """Shift every eigenvalue of `tensors` by ``speed * h**1.5``.

    Args:
        tensors (array_like): One tensor ``(dim, dim)`` or a stack
            ``(N, dim, dim)``.
        speed (array_like): ``|V_K|``, scalar or one per tensor.
        h (float): Mesh size.

    Returns:
        numpy.ndarray: ``U (D + |V_K| h^1.5) U'`` with the same shape as
        `tensors`.
    """
    tensors = np.asarray(tensors, dtype=float)
    single = tensors.ndim == 2
    stack = tensors[None] if single else tensors
    check_tensors(stack)

    shift = np.broadcast_to(np.asarray(speed, dtype=float), stack.shape[:1]) * (
        h ** VANISHING_EXPONENT
    )
    eigenvalues, vectors = np.linalg.eigh(stack)
    eigenvalues = eigenvalues + shift[:, None]
    result = np.einsum("nik,nk,njk->nij", vectors, eigenvalues, vectors)
    return result[0] if single else result


def diffusion_blocks(geom, group, tensors):
    """Diffusive flux rows of `group` for per-cell `tensors`."""
    _, B = local_gradient_operators(geom, group)
    hull = geom.pair_hull[group.pairs]
    lam = tensors[group.cells]

    lam_b = np.einsum("mde,mjel->mjdl", lam, B)
    stiffness = np.einsum("mj,mjdk,mjdl->mkl", hull, B, lam_b)
    return -stiffness[:, 1:, :]


def upwind_blocks(geom, group, fv):
    """First-order hybrid upwind rows ``|σ|(c_K V⁺ - c_σ V⁻)``."""
    m, n = group.pairs.shape
    measure = geom.pair_measure[group.pairs]
    blocks = np.zeros((m, n, n + 1))
    blocks[:, :, 0] = measure * fv.plus[group.pairs]
    blocks[:, np.arange(n), np.arange(1, n + 1)] = -measure * fv.minus[group.pairs]
    return blocks


def reconstruction_increments(geom, group, gradient=DEFAULT_CORRECTION_GRADIENT):
    """Rows mapping local unknowns to ``∇̃c_K · (x_σ - x_K)``.

    Args:
        gradient (str): ``"consistent"`` uses the cell gradient for every
            face, ``"stabilised"`` the stabilised gradient of the face's hull.
    """
    if gradient not in CORRECTION_GRADIENTS:
        raise SchemeError(
            "Unknown correction gradient {0!r}; expected one of {1}".format(
                gradient, CORRECTION_GRADIENTS
            )
        )

    G, B = local_gradient_operators(geom, group)
    delta = geom.pair_delta[group.pairs]
    if gradient == "consistent":
        return np.einsum("mjd,mdk->mjk", delta, G)
    return np.einsum("mjd,mjdk->mjk", delta, B)


def build_local_operators(
    mesh,
    geom,
    tensors,
    fv,
    second_order=True,
    gradient=DEFAULT_CORRECTION_GRADIENT,
    phi=None,
):
    """Build one :class:`LocalFluxOperator` per cell group.

    Args:
        tensors (numpy.ndarray): ``Λ_K`` per cell, shape ``(n_cells, dim,
            dim)``.
        fv (FaceVelocity): Face velocities.
        second_order (bool): Include the reconstruction increments.
        gradient (str): Correction gradient, see
            :func:`reconstruction_increments`.
        phi (numpy.ndarray, optional): Limiter value per cell. Defaults to
            one (unlimited) for second order.
    """
    operators = []
    for group in geom.groups:
        dofs = np.concatenate(
            [group.cells[:, None], mesh.n_cells + geom.pair_face[group.pairs]], axis=1
        )
        increments = outflow = None
        if second_order:
            increments = reconstruction_increments(geom, group, gradient)
            outflow = geom.pair_measure[group.pairs] * fv.plus[group.pairs]

        operators.append(
            LocalFluxOperator(
                group,
                dofs,
                diffusion_blocks(geom, group, tensors),
                upwind_blocks(geom, group, fv),
                increments,
                outflow,
                None if phi is None else phi[group.cells],
            )
        )

    log.debug(
        "Built {0} local flux operators ({1}, {2} gradient)".format(
            len(operators), "second order" if second_order else "first order", gradient
        )
    )
    return operators


def diffusion_local_operator(geom, cell, tensor):
    """Diffusive flux block ``(n, n + 1)`` of a single cell.

    Raises:
        TensorError: If `tensor` is not symmetric positive definite.
    """
    group = _single(geom, cell)
    tensors = np.zeros((geom.n_cells,) + np.shape(tensor))
    tensors[cell] = check_tensors(np.asarray(tensor, dtype=float)[None])[0]
    return diffusion_blocks(geom, group, tensors)[0]


def advective_upwind_hybrid(geom, cell, fv):
    """First-order hybrid advective block ``(n, n + 1)`` of a single cell."""
    return upwind_blocks(geom, _single(geom, cell), fv)[0]


def advective_second_order_hybrid(
    geom, cell, fv, gradient=DEFAULT_CORRECTION_GRADIENT
):
    """Unlimited second-order hybrid advective block of a single cell."""
    group = _single(geom, cell)
    outflow = geom.pair_measure[group.pairs] * fv.plus[group.pairs]
    correction = outflow[:, :, None] * reconstruction_increments(geom, group, gradient)
    return (upwind_blocks(geom, group, fv) + correction)[0]


def barth_jespersen(values, deltas):
    """Barth-Jespersen limiter.

    Args:
        values (numpy.ndarray): Local data ``(c_K, c_σ...)``, shape
            ``(m, n + 1)``.
        deltas (numpy.ndarray): Reconstruction increments at the faces,
            shape ``(m, n)``.

    Returns:
        numpy.ndarray: ``φ_K`` in ``[0, 1]``, the largest factor keeping
        every ``c_K + φ δ_σ`` inside ``[min, max]`` of the local data. Zero
        increments impose no constraint.
    """
    values = np.atleast_2d(values)
    deltas = np.atleast_2d(deltas)
    center = values[:, :1]
    upper = values.max(axis=1, keepdims=True) - center
    lower = values.min(axis=1, keepdims=True) - center

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(
            deltas > 0.0,
            upper / deltas,
            np.where(deltas < 0.0, lower / deltas, 1.0),
        )

    return np.clip(ratio.min(axis=1), 0.0, 1.0)


def limiter_phi(geom, group, values, gradient=DEFAULT_CORRECTION_GRADIENT):
    """Limiter values of `group` for local data `values` ``(m, n + 1)``."""
    increments = reconstruction_increments(geom, group, gradient)
    deltas = np.einsum("mjk,mk->mj", increments, values)
    return barth_jespersen(values, deltas)


def near_boundary_cells(mesh, geom, fv, treatment=DEFAULT_BOUNDARY_TREATMENT):
    """Cells that fall back to first-order cell-centered fluxes.

    Args:
        treatment (str): ``"mirror"`` flags nothing: an inflow boundary face
            enters the upwind gradient through the mirrored value
            ``2 c_σ - c_K``. ``"inflow"`` flags cells owning an inflow
            boundary face, ``"boundary"`` every cell owning a boundary face.
    """
    if treatment not in BOUNDARY_TREATMENTS:
        raise SchemeError(
            "Unknown boundary treatment {0!r}; expected one of {1}".format(
                treatment, BOUNDARY_TREATMENTS
            )
        )

    flagged = np.zeros(mesh.n_cells, dtype=bool)
    pairs = np.flatnonzero(geom.boundary_pairs)
    if treatment == "inflow":
        pairs = pairs[fv.pair_velocity[pairs] < 0.0]
    elif treatment == "mirror":
        pairs = pairs[:0]
    flagged[geom.pair_cell[pairs]] = True
    return flagged


def upwind_gradient_operator(mesh, geom, fv):
    """Sparse map from hybrid unknowns to the upwind-valued cell gradients.

    Row ``K * dim + i`` gives component ``i`` of
    ``(1/|K|) sum |σ| (c^up_σ - c_K) n_Kσ`` where ``c^up_σ = c_K`` unless
    ``V_Kσ < 0``. On inflow faces ``c^up_σ`` is the neighbor cell value, or on
    the boundary the mirrored value ``2 c_σ - c_K`` so that the difference
    spans a full cell width.
    """
    n_unknowns = mesh.n_cells + mesh.n_faces
    inflow = np.flatnonzero(fv.pair_velocity < 0.0)
    cells = geom.pair_cell[inflow]
    twin = geom.pair_twin[inflow]
    across = np.where(
        twin >= 0,
        geom.pair_cell[np.maximum(twin, 0)],
        mesh.n_cells + geom.pair_face[inflow],
    )
    scale = np.where(twin >= 0, 1.0, 2.0)

    coef = (scale * geom.pair_measure[inflow] / geom.cell_measure[cells])[
        :, None
    ] * geom.pair_normal[inflow]
    rows = cells[:, None] * mesh.dim + np.arange(mesh.dim)

    data = np.concatenate([coef.ravel(), -coef.ravel()])
    row = np.concatenate([rows.ravel(), rows.ravel()])
    col = np.concatenate(
        [np.repeat(across, mesh.dim), np.repeat(cells, mesh.dim)]
    )
    return sparse.coo_matrix(
        (data, (row, col)), shape=(mesh.n_cells * mesh.dim, n_unknowns)
    ).tocsr()


def cell_centered_advection(
    mesh, geom, fv, second_order=None, boundary=DEFAULT_BOUNDARY_TREATMENT
):
    """Sparse map from hybrid unknowns to ``|σ| F^A_Kσ`` per pair.

    Args:
        second_order (numpy.ndarray, optional): Boolean mask of cells using
            the reconstructed value. Defaults to every cell not flagged by
            :func:`near_boundary_cells`.
        boundary (str): Boundary treatment passed to
            :func:`near_boundary_cells`.

    Raises:
        FluxContractError: If `second_order` selects a flagged cell.
    """
    flagged = near_boundary_cells(mesh, geom, fv, boundary)
    if second_order is None:
        second_order = ~flagged
    second_order = np.asarray(second_order, dtype=bool)

    violations = np.flatnonzero(second_order & flagged)
    if len(violations):
        raise FluxContractError(int(violations[0]))

    n_pairs = geom.n_pairs
    n_unknowns = mesh.n_cells + mesh.n_faces
    pairs = np.arange(n_pairs)

    # Reconstructed value c_K + ∇̃c_K·(x_σ - x_K) per pair.
    own = sparse.coo_matrix(
        (np.ones(n_pairs), (pairs, geom.pair_cell)), shape=(n_pairs, n_unknowns)
    )
    delta = geom.pair_delta * second_order[geom.pair_cell][:, None]
    project = sparse.coo_matrix(
        (
            delta.ravel(),
            (
                np.repeat(pairs, mesh.dim),
                (geom.pair_cell[:, None] * mesh.dim + np.arange(mesh.dim)).ravel(),
            ),
        ),
        shape=(n_pairs, mesh.n_cells * mesh.dim),
    )
    reconstructed = (own + project @ upwind_gradient_operator(mesh, geom, fv)).tocsr()

    # Value on the other side: the twin's reconstruction or the face unknown.
    interior = np.flatnonzero(geom.pair_twin >= 0)
    boundary = np.flatnonzero(geom.pair_twin < 0)
    swap = sparse.coo_matrix(
        (np.ones(len(interior)), (interior, geom.pair_twin[interior])),
        shape=(n_pairs, n_pairs),
    )
    trace = sparse.coo_matrix(
        (
            np.ones(len(boundary)),
            (boundary, mesh.n_cells + geom.pair_face[boundary]),
        ),
        shape=(n_pairs, n_unknowns),
    )
    opposite = (swap @ reconstructed + trace).tocsr()

    outflow = sparse.diags(geom.pair_measure * fv.plus)
    inflow = sparse.diags(geom.pair_measure * fv.minus)
    return (outflow @ reconstructed - inflow @ opposite).tocsr()


def advective_cell_centered(
    mesh, geom, fv, cell_values, face_values=None, boundary=DEFAULT_BOUNDARY_TREATMENT
):
    """Cell-centered advective fluxes ``F^A_Kσ`` per pair.

    Args:
        cell_values (array_like): ``c_K`` per cell.
        face_values (array_like, optional): Face values; only boundary
            entries are read. Defaults to zero.
        boundary (str): See :func:`near_boundary_cells`.
    """
    if face_values is None:
        face_values = np.zeros(mesh.n_faces)
    x = np.concatenate([np.asarray(cell_values, float), np.asarray(face_values, float)])
    operator = cell_centered_advection(mesh, geom, fv, boundary=boundary)
    return operator @ x / geom.pair_measure


def two_point_diffusion(mesh, geom, tensors):
    """Sparse map from hybrid unknowns to two-point diffusive ``|σ| F^D_Kσ``.

    Interior faces use the harmonic average of ``n·Λn / d`` from both sides;
    boundary faces use the half-distance to the face unknown.
    """
    n_pairs = geom.n_pairs
    lam = np.einsum(
        "pd,pde,pe->p", geom.pair_normal, tensors[geom.pair_cell], geom.pair_normal
    )
    resistance = geom.pair_distance / lam

    twin = geom.pair_twin
    interior = twin >= 0
    total = resistance + np.where(interior, resistance[np.maximum(twin, 0)], 0.0)
    transmissibility = geom.pair_measure / total

    other = np.where(
        interior,
        geom.pair_cell[np.maximum(twin, 0)],
        mesh.n_cells + geom.pair_face,
    )
    pairs = np.arange(n_pairs)
    return sparse.coo_matrix(
        (
            np.concatenate([transmissibility, -transmissibility]),
            (np.concatenate([pairs, pairs]), np.concatenate([geom.pair_cell, other])),
        ),
        shape=(n_pairs, mesh.n_cells + mesh.n_faces),
    ).tocsr()


def _single(geom, cell):
    start, stop = geom.pair_offsets[cell], geom.pair_offsets[cell + 1]
    pairs = np.arange(start, stop)[None, :]
    return CellGroup(int(stop - start), np.array([cell]), pairs)
