# -*- coding: utf-8 -*-
"""
Hybrid unknown space: one value per cell plus one value per face.

The consistent gradient of a field ``q`` on cell ``K`` is the Green-formula
gradient ``(1/|K|) sum |σ| (q_σ - q_K) n_Kσ``. The stabilised gradient is
piecewise constant on the hulls ``D_Kσ`` (convex hull of ``σ`` and ``x_K``)
and adds to the consistent gradient a correction proportional to the
deviation of ``q_σ`` from the linear reconstruction at ``x_σ``.

Field-level functions (:func:`consistent_gradient`, :func:`stabilisation`)
evaluate the defining sums directly. :func:`local_gradient_operators` builds
the same maps as dense per-cell matrices acting on the local unknown vector
``(q_K, q_σ1, ..., q_σn)``; the flux module assembles from those.
"""

from collections import namedtuple

import numpy as np

from .exceptions import FieldError, InterpolationError


__all__ = (
    "HybridField",
    "CellGradients",
    "interpolate",
    "consistent_gradient",
    "stabilisation",
    "gradients",
    "local_gradient_operators",
    "reconstruct",
    "norm_l2",
    "norm_h1_like",
    "norm_gradient",
    "evaluate_field",
    "subcell_quadrature",
    "face_quadrature",
    "cell_averages",
    "face_averages",
)


#: Face quadrature rules for boundary data and face velocities.
FACE_RULES = ("midpoint", "gauss2")

_GAUSS2 = 0.5 * (1.0 - 1.0 / np.sqrt(3.0)), 0.5 * (1.0 + 1.0 / np.sqrt(3.0))

# Degree-2 interior rule on a triangle, barycentric weights of
# (x_K, first face vertex, second face vertex).
_TRIANGLE3 = np.array(
    [
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ]
)


class HybridField(object):
    """Element of the hybrid space: cell values and face values.

    Args:
        cell_values (array_like): One value per cell.
        face_values (array_like): One value per face.
    """

    def __init__(self, cell_values, face_values):
        self.cell_values = np.array(cell_values, dtype=float).ravel()
        self.face_values = np.array(face_values, dtype=float).ravel()

    def __repr__(self):  # pragma: no cover
        return "<HybridField cells={0} faces={1}>".format(
            len(self.cell_values), len(self.face_values)
        )

    def __len__(self):
        return len(self.cell_values) + len(self.face_values)

    @classmethod
    def zeros(cls, mesh):
        return cls(np.zeros(mesh.n_cells), np.zeros(mesh.n_faces))

    @classmethod
    def from_vector(cls, vector, n_cells):
        """Split a global vector ordered cells first, then faces."""
        vector = np.asarray(vector, dtype=float)
        return cls(vector[:n_cells], vector[n_cells:])

    def to_vector(self):
        return np.concatenate([self.cell_values, self.face_values])

    def scaled(self, alpha, beta=0.0):
        """Return ``alpha * self + beta``."""
        return HybridField(
            alpha * self.cell_values + beta, alpha * self.face_values + beta
        )

    def local_values(self, geom, group):
        """Local unknown vectors ``(q_K, q_σ...)`` of `group`, shape
        ``(m, size + 1)``.
        """
        return np.concatenate(
            [
                self.cell_values[group.cells][:, None],
                self.face_values[geom.pair_face[group.pairs]],
            ],
            axis=1,
        )

    def validate(self, mesh):
        """Check sizes against `mesh` and that all values are finite.

        Raises:
            FieldError
        """
        if len(self.cell_values) != mesh.n_cells or len(self.face_values) != (
            mesh.n_faces
        ):
            raise FieldError(
                "Field sized ({0}, {1}) does not match mesh ({2}, {3})".format(
                    len(self.cell_values),
                    len(self.face_values),
                    mesh.n_cells,
                    mesh.n_faces,
                )
            )
        if not (
            np.all(np.isfinite(self.cell_values))
            and np.all(np.isfinite(self.face_values))
        ):
            raise FieldError("Field has non-finite values")
        return self


class CellGradients(
    namedtuple("CellGradients", ["consistent", "stabilisation", "pair_cell"])
):
    """Consistent gradient per cell and stabilisation per (cell, face) pair.

    Attributes:
        consistent (numpy.ndarray): Shape ``(n_cells, dim)``.
        stabilisation (numpy.ndarray): Shape ``(n_pairs, dim)``.
        pair_cell (numpy.ndarray): Cell of every pair.
    """

    __slots__ = ()

    @property
    def stabilised(self):
        """Stabilised gradient on every hull ``D_Kσ``, shape
        ``(n_pairs, dim)``.
        """
        return self.consistent[self.pair_cell] + self.stabilisation

    @property
    def consistent_on_pairs(self):
        return self.consistent[self.pair_cell]


def evaluate_field(func, points, name="field"):
    """Evaluate the vectorised callable `func` on an ``(N, dim)`` point array.

    Raises:
        InterpolationError: If evaluation raises, returns the wrong number of
            values or produces non-finite values. The message names the first
            offending point.
    """
    points = np.asarray(points, dtype=float)

    try:
        values = np.asarray(func(points), dtype=float)
    except Exception as ex:
        raise InterpolationError(
            "Evaluating {0} on {1} points failed: {2}".format(name, len(points), ex)
        )

    if values.ndim == 0:
        values = np.full(len(points), float(values))

    if values.shape[0] != len(points):
        raise InterpolationError(
            "{0} returned {1} values for {2} points".format(
                name, values.shape[0], len(points)
            )
        )

    finite = np.isfinite(values.reshape(len(points), -1)).all(axis=1)
    if not finite.all():
        index = int(np.flatnonzero(~finite)[0])
        raise InterpolationError(
            "{0} is not finite at point {1} ({2})".format(
                name, index, points[index].tolist()
            )
        )

    return values


def interpolate(mesh, geom, u):
    """Interpolate the scalar field `u` into the hybrid space.

    Cell values are point values at centroids, face values point values at
    face midpoints.
    """
    return HybridField(
        evaluate_field(u, geom.cell_centroid, "field at cell centroids"),
        evaluate_field(u, geom.face_center, "field at face midpoints"),
    ).validate(mesh)


def consistent_gradient(mesh, geom, q):
    """Return ``(1/|K|) sum |σ| (q_σ - q_K) n_Kσ`` for every cell."""
    jump = q.face_values[geom.pair_face] - q.cell_values[geom.pair_cell]
    contrib = (geom.pair_measure * jump)[:, None] * geom.pair_normal

    gradient = np.zeros((mesh.n_cells, mesh.dim))
    np.add.at(gradient, geom.pair_cell, contrib)
    return gradient / geom.cell_measure[:, None]


def stabilisation(mesh, geom, q, consistent):
    """Return ``(√d/d_Kσ) [q_σ - q_K - ∇̄_K q·(x_σ - x_K)] n_Kσ`` for every
    (cell, face) pair.
    """
    residual = (
        q.face_values[geom.pair_face]
        - q.cell_values[geom.pair_cell]
        - (consistent[geom.pair_cell] * geom.pair_delta).sum(axis=1)
    )
    scale = np.sqrt(mesh.dim) / geom.pair_distance
    return (scale * residual)[:, None] * geom.pair_normal


def gradients(mesh, geom, q):
    """Return :class:`CellGradients` of `q`."""
    consistent = consistent_gradient(mesh, geom, q)
    return CellGradients(
        consistent, stabilisation(mesh, geom, q, consistent), geom.pair_cell
    )


def local_gradient_operators(geom, group):
    """Return the consistent and stabilised gradient matrices of `group`.

    Returns:
        tuple: ``(G, B)`` where ``G`` has shape ``(m, dim, size + 1)`` and maps
        local unknowns to the consistent gradient, and ``B`` has shape
        ``(m, size, dim, size + 1)`` and maps them to the stabilised gradient
        on each hull.
    """
    m, n = group.pairs.shape
    dim = geom.dim
    area = geom.cell_measure[group.cells]
    measure = geom.pair_measure[group.pairs]
    normal = geom.pair_normal[group.pairs]
    delta = geom.pair_delta[group.pairs]
    distance = geom.pair_distance[group.pairs]

    weighted = measure[:, :, None] * normal / area[:, None, None]
    G = np.zeros((m, dim, n + 1))
    G[:, :, 0] = -weighted.sum(axis=1)
    G[:, :, 1:] = weighted.transpose(0, 2, 1)

    # Residual of the linear reconstruction at each face: e_σ - e_K - Δ·G.
    select = np.zeros((n, n + 1))
    select[:, 0] = -1.0
    select[np.arange(n), np.arange(1, n + 1)] = 1.0
    residual = select[None, :, :] - np.einsum("mjd,mdk->mjk", delta, G)

    scale = np.sqrt(dim) / distance
    S = (scale[:, :, None] * normal)[:, :, :, None] * residual[:, :, None, :]
    B = G[:, None, :, :] + S
    return G, B


def reconstruct(q):
    """Piecewise-constant reconstruction: value ``q_K`` on cell ``K``."""
    return np.array(q.cell_values)


def norm_l2(mesh, geom, q):
    """Discrete L2 norm ``(sum |K| q_K²)^(1/2)``."""
    return float(np.sqrt((geom.cell_measure * q.cell_values ** 2).sum()))


def norm_h1_like(mesh, geom, q):
    """Discrete H1-like norm ``(sum_K sum_σ (|σ|/d_Kσ) (q_K - q_σ)²)^(1/2)``."""
    jump = q.cell_values[geom.pair_cell] - q.face_values[geom.pair_face]
    return float(np.sqrt((geom.pair_measure / geom.pair_distance * jump ** 2).sum()))


def norm_gradient(geom, pair_gradients):
    """L2 norm of a gradient that is constant on every hull ``D_Kσ``."""
    return float(np.sqrt((geom.pair_hull * (pair_gradients ** 2).sum(axis=1)).sum()))


def subcell_quadrature(mesh, geom):
    """Quadrature on the hulls ``D_Kσ``: degree 2 on triangles in 2D and
    two-point Gauss on the half-cells in 1D.

    Returns:
        tuple: ``(points, weights)`` of shapes ``(n_pairs, q, dim)`` and
        ``(n_pairs, q)``; weights sum to ``|D_Kσ|`` per pair.
    """
    centroid = geom.cell_centroid[geom.pair_cell]

    if mesh.dim == 1:
        delta = geom.pair_delta
        points = np.stack([centroid + t * delta for t in _GAUSS2], axis=1)
        weights = np.repeat(0.5 * geom.pair_hull[:, None], 2, axis=1)
        return points, weights

    ends = mesh.vertices[mesh.faces[geom.pair_face]]
    corners = np.stack([centroid, ends[:, 0, :], ends[:, 1, :]], axis=1)
    points = np.einsum("qc,pcd->pqd", _TRIANGLE3, corners)
    weights = np.repeat(geom.pair_hull[:, None] / 3.0, 3, axis=1)
    return points, weights


def face_quadrature(mesh, geom, rule="midpoint"):
    """Normalised face quadrature (weights sum to one per face).

    Args:
        rule (str): ``"midpoint"`` or ``"gauss2"``.

    Returns:
        tuple: ``(points, weights)`` of shapes ``(n_faces, q, dim)`` and
        ``(n_faces, q)``.
    """
    if rule not in FACE_RULES:
        raise FieldError(
            "Unknown face quadrature {0!r}; expected one of {1}".format(
                rule, FACE_RULES
            )
        )

    if rule == "midpoint" or mesh.dim == 1:
        return geom.face_center[:, None, :], np.ones((mesh.n_faces, 1))

    a = mesh.vertices[mesh.faces[:, 0]]
    b = mesh.vertices[mesh.faces[:, 1]]
    points = np.stack([a + t * (b - a) for t in _GAUSS2], axis=1)
    return points, np.full((mesh.n_faces, 2), 0.5)


def cell_averages(mesh, geom, func, name="field"):
    """Average of the scalar callable `func` over every cell."""
    points, weights = subcell_quadrature(mesh, geom)
    values = evaluate_field(func, points.reshape(-1, mesh.dim), name)
    integrals = (values.reshape(weights.shape) * weights).sum(axis=1)
    return np.bincount(geom.pair_cell, integrals, mesh.n_cells) / geom.cell_measure


def face_averages(mesh, geom, func, rule="midpoint", name="field"):
    """Average of the callable `func` over every face.

    Scalar callables give shape ``(n_faces,)``, vector callables
    ``(n_faces, dim)``.
    """
    points, weights = face_quadrature(mesh, geom, rule)
    values = evaluate_field(func, points.reshape(-1, mesh.dim), name)
    values = values.reshape(weights.shape + values.shape[1:])
    if values.ndim == 2:
        return (values * weights).sum(axis=1)
    return (values * weights[:, :, None]).sum(axis=1)
