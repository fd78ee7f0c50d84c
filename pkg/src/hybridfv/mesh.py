# -*- coding: utf-8 -*-
"""
Mesh module for 1D interval meshes and 2D polygonal meshes.

A :class:`PolyMesh` stores vertices, counter-clockwise cell vertex loops and
the face connectivity derived from them (each face knows its owner cell and,
for interior faces, its neighbor cell). :func:`compute_geometry` turns a mesh
into a :class:`GeometryCache` holding every geometric quantity the
discretisation consumes, organised per (cell, face) pair so that local
operators can be built with vectorised numpy algebra.

Pairs are numbered cell by cell in loop order: the faces of cell ``K`` are
pairs ``geom.pair_offsets[K]`` to ``geom.pair_offsets[K + 1] - 1``. Cells with
the same number of faces are batched into :class:`CellGroup` objects.
"""

from collections import namedtuple
import logging

import numpy as np

from .exceptions import (
    DegenerateCellError,
    MeshFormatError,
    MeshInputError,
    PerturbationError,
)


__all__ = (
    "PolyMesh",
    "GeometryCache",
    "CellGroup",
    "RegularityReport",
    "build_cartesian",
    "build_triangular",
    "build_interval",
    "build_kershaw",
    "build_family",
    "perturb_mesh",
    "compute_geometry",
    "regularity",
    "check_alignment",
    "read_mesh",
    "write_mesh",
)


log = logging.getLogger(__name__)


UNIT_INTERVAL = (0.0, 1.0)
UNIT_SQUARE = (0.0, 1.0, 0.0, 1.0)

#: Default relative displacement of internal vertices for moved meshes.
DEFAULT_PERTURBATION = 0.4

#: Number of fresh draws per vertex before the displacement gets clamped.
PERTURBATION_RETRIES = 16

#: Kershaw column shift amplitude. Together with 6x6 cells at level 1 this
#: gives h = 0.3287 on the unit square.
KERSHAW_DISTORTION = 0.11664
KERSHAW_BANDS = 3

#: Mesh families available to convergence studies.
FAMILIES = ("M1", "M2", "M3", "M4", "M5", "I1")

# Relative tolerance for "point lies on an interface line".
INTERFACE_TOL = 1e-12


RegularityReport = namedtuple(
    "RegularityReport", ["distance_ratio", "boundary_ratio", "max_faces", "regul"]
)


class CellGroup(namedtuple("CellGroup", ["size", "cells", "pairs"])):
    """Cells with the same face count.

    Attributes:
        size (int): Number of faces per cell.
        cells (numpy.ndarray): Cell indices, shape ``(m,)``.
        pairs (numpy.ndarray): Pair indices, shape ``(m, size)``, in loop
            order.
    """

    __slots__ = ()


class PolyMesh(object):
    """Conforming 1D interval or 2D polygonal mesh.

    Args:
        dim (int): Space dimension, 1 or 2.
        vertices (array_like): Vertex coordinates, shape ``(nv, dim)``.
        cells (list): Vertex-index loops, counter-clockwise in 2D. A 1D cell
            is the pair ``(left, right)``.
        faces (array_like, optional): Face vertex indices. When given
            together with `face_cells` the face numbering is adopted instead
            of being derived from `cells`.
        face_cells (array_like, optional): ``(owner, neighbor)`` per face,
            ``-1`` for a missing neighbor.
        interfaces (tuple, optional): Internal lines ``("x", value)`` or
            ``("y", value)`` the mesh is aligned with.

    Raises:
        MeshInputError: On inconsistent connectivity.
    """

    def __init__(
        self, dim, vertices, cells, faces=None, face_cells=None, interfaces=()
    ):
        if dim not in (1, 2):
            raise MeshInputError("Mesh dimension must be 1 or 2, got {0}".format(dim))

        vertices = np.array(vertices, dtype=float)
        if dim == 1 and vertices.ndim == 1:
            vertices = vertices.reshape(-1, 1)

        if vertices.ndim != 2 or vertices.shape[1] != dim:
            raise MeshInputError(
                "Vertex array must have shape (nv, {0}), got {1}".format(
                    dim, vertices.shape
                )
            )

        if not np.all(np.isfinite(vertices)):
            raise MeshInputError("Vertex coordinates must be finite")

        self.dim = dim
        self.vertices = vertices
        self.vertices.setflags(write=False)
        self.cells = [tuple(int(v) for v in cell) for cell in cells]
        self.interfaces = tuple((str(axis), float(value)) for axis, value in interfaces)

        self._check_cells()

        if faces is None:
            self._build_faces()
        else:
            self._adopt_faces(faces, face_cells)

    def __repr__(self):  # pragma: no cover
        return "<PolyMesh dim={0} nv={1} ne={2} nk={3}>".format(
            self.dim, self.n_vertices, self.n_faces, self.n_cells
        )

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def boundary_faces(self):
        """Boolean mask of faces with a single incident cell."""
        return self.face_cells[:, 1] < 0

    @property
    def n_boundary_faces(self):
        return int(np.count_nonzero(self.boundary_faces))

    @property
    def boundary_vertices(self):
        """Boolean mask of vertices lying on a boundary face."""
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.faces[self.boundary_faces].ravel()] = True
        return mask

    def euler_characteristic(self):
        """Return ``N_v - N_e + N_K`` (1 for simply connected 2D meshes)."""
        return self.n_vertices - self.n_faces + self.n_cells

    def face_sizes(self):
        """Number of faces of every cell."""
        return np.array([len(faces) for faces in self.cell_faces], dtype=int)

    def vertex_cells(self):
        """Return list of incident cell indices per vertex."""
        incident = [[] for _ in range(self.n_vertices)]
        for k, cell in enumerate(self.cells):
            for v in cell:
                incident[v].append(k)
        return incident

    def on_interfaces(self):
        """Boolean mask of vertices lying on one of the mesh interfaces."""
        mask = np.zeros(self.n_vertices, dtype=bool)
        for axis, value in self.interfaces:
            coord = self.vertices[:, _axis_index(axis)]
            mask |= np.abs(coord - value) <= INTERFACE_TOL * max(1.0, abs(value))
        return mask

    def pinned_vertices(self):
        """Vertices that must not move under perturbation."""
        return self.boundary_vertices | self.on_interfaces()

    def with_vertices(self, vertices):
        """Return mesh with the same topology and new vertex coordinates."""
        return PolyMesh(
            self.dim,
            vertices,
            self.cells,
            faces=self.faces,
            face_cells=self.face_cells,
            interfaces=self.interfaces,
        )

    def _check_cells(self):
        if not self.cells:
            raise MeshInputError("Mesh has no cells")

        size = 2 if self.dim == 1 else 3
        for k, cell in enumerate(self.cells):
            if (self.dim == 1 and len(cell) != 2) or len(cell) < size:
                raise MeshInputError(
                    "Cell {0} has {1} vertices, need {2}".format(k, len(cell), size)
                )
            if len(set(cell)) != len(cell):
                raise MeshInputError("Cell {0} repeats a vertex".format(k))
            if min(cell) < 0 or max(cell) >= self.n_vertices:
                raise MeshInputError("Cell {0} references a missing vertex".format(k))

    def _face_keys(self, cell):
        if self.dim == 1:
            return [((v,), (v,)) for v in cell]

        loop = list(cell) + [cell[0]]
        return [
            (tuple(sorted((a, b))), (a, b)) for a, b in zip(loop[:-1], loop[1:])
        ]

    def _build_faces(self):
        lookup = {}
        faces = []
        face_cells = []
        cell_faces = []

        for k, cell in enumerate(self.cells):
            local = []
            for key, verts in self._face_keys(cell):
                index = lookup.get(key)
                if index is None:
                    index = len(faces)
                    lookup[key] = index
                    faces.append(verts)
                    face_cells.append([k, -1])
                elif face_cells[index][1] < 0 and face_cells[index][0] != k:
                    face_cells[index][1] = k
                else:
                    raise MeshInputError(
                        "Face {0} is shared by more than two cells".format(key)
                    )
                local.append(index)
            cell_faces.append(tuple(local))

        self.faces = np.array(faces, dtype=int).reshape(len(faces), self.dim)
        self.face_cells = np.array(face_cells, dtype=int).reshape(len(faces), 2)
        self.cell_faces = cell_faces

    def _adopt_faces(self, faces, face_cells):
        faces = np.array(faces, dtype=int).reshape(-1, self.dim)
        face_cells = np.array(face_cells, dtype=int).reshape(-1, 2)
        if len(faces) != len(face_cells):
            raise MeshInputError("faces and face_cells differ in length")

        lookup = {}
        for index, verts in enumerate(faces):
            key = tuple(sorted(int(v) for v in verts))
            if key in lookup:
                raise MeshInputError("Duplicate face {0}".format(key))
            lookup[key] = index

        incidence = [[] for _ in range(len(faces))]
        cell_faces = []
        for k, cell in enumerate(self.cells):
            local = []
            for key, _ in self._face_keys(cell):
                if key not in lookup:
                    raise MeshInputError(
                        "Cell {0} uses face {1} missing from the face list".format(
                            k, key
                        )
                    )
                local.append(lookup[key])
                incidence[lookup[key]].append(k)
            cell_faces.append(tuple(local))

        for index, cells in enumerate(incidence):
            owner, neighbor = face_cells[index]
            expected = sorted(c for c in (owner, neighbor) if c >= 0)
            if owner < 0 or sorted(cells) != expected:
                raise MeshInputError(
                    "Face {0} connectivity {1} does not match cells {2}".format(
                        index, (owner, neighbor), cells
                    )
                )

        self.faces = faces
        self.face_cells = face_cells
        self.cell_faces = cell_faces


class GeometryCache(object):
    """Geometric quantities of a :class:`PolyMesh`.

    Cell arrays are indexed by cell, face arrays by face and pair arrays by
    (cell, face) pair. Face normals are oriented outward from the face owner;
    pair normals are outward from the pair's cell, so interior pairs on the
    same face carry exactly opposite normals.
    """

    def __init__(self, mesh):
        self.dim = mesh.dim
        self.n_cells = mesh.n_cells
        self.n_faces = mesh.n_faces

        sizes = mesh.face_sizes()
        self.pair_offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.pair_cell = np.repeat(np.arange(mesh.n_cells), sizes)
        self.pair_face = np.concatenate(
            [np.asarray(faces, dtype=int) for faces in mesh.cell_faces]
        )
        self.pair_sign = np.where(
            mesh.face_cells[self.pair_face, 0] == self.pair_cell, 1.0, -1.0
        )
        self.groups = [
            CellGroup(
                int(n),
                np.flatnonzero(sizes == n),
                self.pair_offsets[np.flatnonzero(sizes == n)][:, None] + np.arange(n),
            )
            for n in np.unique(sizes)
        ]

        self._compute_cells(mesh)
        self._compute_faces(mesh)
        self._compute_pairs(mesh)

        self.h = float(self.cell_diameter.max())

    @property
    def n_pairs(self):
        return len(self.pair_cell)

    @property
    def pair_measure(self):
        """|σ| per pair."""
        return self.face_measure[self.pair_face]

    @property
    def pair_center(self):
        """x_σ per pair."""
        return self.face_center[self.pair_face]

    @property
    def pair_delta(self):
        """x_σ - x_K per pair."""
        return self.pair_center - self.cell_centroid[self.pair_cell]

    @property
    def boundary_pairs(self):
        return self.pair_twin < 0

    def _compute_cells(self, mesh):
        dim = mesh.dim
        self.cell_measure = np.zeros(mesh.n_cells)
        self.cell_centroid = np.zeros((mesh.n_cells, dim))
        self.cell_diameter = np.zeros(mesh.n_cells)

        for group in self.groups:
            loops = np.array([mesh.cells[k] for k in group.cells], dtype=int)
            points = mesh.vertices[loops]

            if dim == 1:
                measure = points[:, 1, 0] - points[:, 0, 0]
                centroid = 0.5 * (points[:, 0, :] + points[:, 1, :])
                diameter = np.abs(measure)
            else:
                nxt = np.roll(points, -1, axis=1)
                cross = points[..., 0] * nxt[..., 1] - nxt[..., 0] * points[..., 1]
                measure = 0.5 * cross.sum(axis=1)
                with np.errstate(divide="ignore", invalid="ignore"):
                    centroid = ((points + nxt) * cross[..., None]).sum(axis=1) / (
                        6.0 * measure[:, None]
                    )
                gaps = points[:, :, None, :] - points[:, None, :, :]
                diameter = np.sqrt((gaps ** 2).sum(axis=-1)).max(axis=(1, 2))

            bad = np.flatnonzero(~(measure > 0.0))
            if len(bad):
                raise DegenerateCellError(
                    int(group.cells[bad[0]]),
                    "Cell has non-positive measure {0!r} (loops must be "
                    "counter-clockwise)".format(float(measure[bad[0]])),
                )

            self.cell_measure[group.cells] = measure
            self.cell_centroid[group.cells] = centroid
            self.cell_diameter[group.cells] = diameter

    def _compute_faces(self, mesh):
        owner = mesh.face_cells[:, 0]

        if mesh.dim == 1:
            self.face_measure = np.ones(mesh.n_faces)
            self.face_center = mesh.vertices[mesh.faces[:, 0]].copy()
            normal = np.ones((mesh.n_faces, 1))
        else:
            a = mesh.vertices[mesh.faces[:, 0]]
            b = mesh.vertices[mesh.faces[:, 1]]
            edge = b - a
            self.face_measure = np.sqrt((edge ** 2).sum(axis=1))
            self.face_center = 0.5 * (a + b)

            bad = np.flatnonzero(~(self.face_measure > 0.0))
            if len(bad):
                raise DegenerateCellError(
                    int(owner[bad[0]]), "Face {0} has zero length".format(int(bad[0]))
                )

            normal = np.stack([edge[:, 1], -edge[:, 0]], axis=1)
            normal /= self.face_measure[:, None]

        # Orient outward from the owner.
        outward = ((self.face_center - self.cell_centroid[owner]) * normal).sum(axis=1)
        normal[outward < 0.0] *= -1.0
        self.face_normal = normal

    def _compute_pairs(self, mesh):
        self.pair_normal = self.pair_sign[:, None] * self.face_normal[self.pair_face]
        delta = self.pair_delta
        self.pair_distance = (delta * self.pair_normal).sum(axis=1)

        bad = np.flatnonzero(~(self.pair_distance > 0.0))
        if len(bad):
            raise DegenerateCellError(
                int(self.pair_cell[bad[0]]),
                "Cell is not star-shaped with respect to its centroid",
            )

        if mesh.dim == 1:
            self.pair_hull = np.abs(delta[:, 0])
        else:
            ends = mesh.vertices[mesh.faces[self.pair_face]]
            centroid = self.cell_centroid[self.pair_cell]
            u = ends[:, 0, :] - centroid
            v = ends[:, 1, :] - centroid
            self.pair_hull = 0.5 * np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])

        face_pairs = -np.ones((mesh.n_faces, 2), dtype=int)
        side = np.where(self.pair_sign > 0, 0, 1)
        face_pairs[self.pair_face, side] = np.arange(self.n_pairs)
        self.face_pairs = face_pairs
        self.pair_twin = face_pairs[self.pair_face, 1 - side]


def compute_geometry(mesh):
    """Compute the :class:`GeometryCache` of `mesh`.

    Raises:
        DegenerateCellError: For a zero-measure cell or face, a clockwise cell
            loop or a cell that is not star-shaped with respect to its
            centroid. The offending cell index is the error identifier.
    """
    geom = GeometryCache(mesh)
    log.debug(
        "Computed geometry for {0} cells, {1} faces (h={2:.4e})".format(
            mesh.n_cells, mesh.n_faces, geom.h
        )
    )
    return geom


def regularity(mesh, geom):
    """Return the mesh regularity report.

    The interior ratio compares the orthogonal distances of both cells to
    a shared face, taken in whichever direction exceeds one.
    """
    interior = np.flatnonzero(~mesh.boundary_faces)
    if len(interior):
        pairs = geom.face_pairs[interior]
        ratio = geom.pair_distance[pairs[:, 0]] / geom.pair_distance[pairs[:, 1]]
        distance_ratio = float(np.maximum(ratio, 1.0 / ratio).max())
    else:
        distance_ratio = 1.0

    boundary = np.flatnonzero(geom.boundary_pairs)
    boundary_ratio = float(
        (
            geom.cell_diameter[geom.pair_cell[boundary]]
            / geom.pair_distance[boundary]
        ).max()
    )

    max_faces = int(mesh.face_sizes().max())

    return RegularityReport(
        distance_ratio,
        boundary_ratio,
        max_faces,
        max(distance_ratio, boundary_ratio, float(max_faces)),
    )


def build_interval(n, domain=UNIT_INTERVAL):
    """Build `n` equidistant cells on the interval `domain`."""
    _check_count(n, "n")
    lo, hi = _check_bounds(domain[0], domain[1])
    points = lo + (hi - lo) * np.linspace(0.0, 1.0, n + 1)
    return PolyMesh(1, points, [(i, i + 1) for i in range(n)])


def build_cartesian(nx, ny, domain=UNIT_SQUARE, interfaces=()):
    """Build an `nx` by `ny` grid of rectangles.

    Args:
        nx (int): Cells along x.
        ny (int): Cells along y.
        domain (tuple): ``(x0, x1, y0, y1)``.
        interfaces (tuple, optional): Lines ``("x", value)``/``("y", value)``
            onto which the nearest interior grid line is snapped.

    Returns:
        PolyMesh
    """
    xs, ys = _grid_lines(nx, ny, domain, interfaces)
    X, Y = np.meshgrid(xs, ys)
    return _structured_quads(X, Y, interfaces)


def build_triangular(nx, ny, domain=UNIT_SQUARE, interfaces=()):
    """Build a conforming triangulation by splitting every grid square along
    one diagonal, alternating the diagonal in a checkerboard pattern.
    """
    xs, ys = _grid_lines(nx, ny, domain, interfaces)
    X, Y = np.meshgrid(xs, ys)
    vertices = np.stack([X.ravel(), Y.ravel()], axis=1)

    def vid(i, j):
        return j * (nx + 1) + i

    cells = []
    for j in range(ny):
        for i in range(nx):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            if (i + j) % 2 == 0:
                cells.extend([(v00, v10, v11), (v00, v11, v01)])
            else:
                cells.extend([(v00, v10, v01), (v10, v11, v01)])

    return PolyMesh(2, vertices, cells, interfaces=interfaces)


def build_kershaw(
    nx, ny, distortion=KERSHAW_DISTORTION, domain=UNIT_SQUARE, bands=KERSHAW_BANDS
):
    """Build a Kershaw-type Z-pattern quadrilateral mesh.

    Rows are uniform. Columns are shifted by
    ``distortion * z(eta) * b(xi)`` (in units of the domain width), where
    ``b`` is the hat function ``1 - |2 xi - 1|`` and ``z`` a triangle wave that
    equals +1 and -1 on alternating boundaries of `bands` horizontal bands.
    Every cell is a trapezoid with horizontal top and bottom, hence convex.

    Raises:
        MeshInputError: If `ny` is not a multiple of `bands` or
            `distortion` is outside ``[0, 0.5)``.
    """
    _check_count(nx, "nx")
    _check_count(ny, "ny")
    if bands < 1 or ny % bands:
        raise MeshInputError(
            "ny={0} must be a multiple of the band count {1}".format(ny, bands)
        )
    if not 0.0 <= distortion < 0.5:
        raise MeshInputError(
            "Kershaw distortion must be in [0, 0.5), got {0}".format(distortion)
        )

    x0, x1 = _check_bounds(domain[0], domain[1])
    y0, y1 = _check_bounds(domain[2], domain[3])

    xi = np.linspace(0.0, 1.0, nx + 1)
    eta = np.linspace(0.0, 1.0, ny + 1)
    hat = 1.0 - np.abs(2.0 * xi - 1.0)
    zigzag = 2.0 * np.abs(np.mod(eta * bands, 2.0) - 1.0) - 1.0

    X = x0 + (x1 - x0) * (xi[None, :] + distortion * zigzag[:, None] * hat[None, :])
    Y = np.broadcast_to((y0 + (y1 - y0) * eta)[:, None], X.shape)
    return _structured_quads(X, Y)


def build_family(
    name,
    level,
    seed=0,
    interfaces=(),
    cells_1d=100,
    perturbation=DEFAULT_PERTURBATION,
    distortion=KERSHAW_DISTORTION,
):
    """Build refinement level `level` (1-based) of a mesh family.

    ======  ========================================  =====================
    name    mesh                                      cells per direction
    ======  ========================================  =====================
    M1      Cartesian                                 4 * 2**(level - 1)
    M2      triangular                                4 * 2**(level - 1)
    M3      perturbed Cartesian                       4 * 2**(level - 1)
    M4      perturbed triangular                      4 * 2**(level - 1)
    M5      Kershaw                                   6 * 2**(level - 1)
    I1      interval on (0, 1)                        cells_1d * 2**(level - 1)
    ======  ========================================  =====================
    """
    if level < 1:
        raise MeshInputError("Refinement level must be >= 1, got {0}".format(level))

    scale = 2 ** (level - 1)
    n = 4 * scale

    if name == "M1":
        return build_cartesian(n, n, interfaces=interfaces)
    if name == "M2":
        return build_triangular(n, n, interfaces=interfaces)
    if name == "M3":
        return perturb_mesh(
            build_cartesian(n, n, interfaces=interfaces), perturbation, seed
        )
    if name == "M4":
        return perturb_mesh(
            build_triangular(n, n, interfaces=interfaces), perturbation, seed
        )
    if name == "M5":
        if interfaces:
            raise MeshInputError("Kershaw meshes do not support interface snapping")
        return build_kershaw(6 * scale, 6 * scale, distortion)
    if name == "I1":
        return build_interval(cells_1d * scale)

    raise MeshInputError(
        "Unknown mesh family {0!r}; expected one of {1}".format(name, FAMILIES)
    )


def perturb_mesh(mesh, factor=DEFAULT_PERTURBATION, seed=0):
    """Randomly displace the internal vertices of `mesh`.

    Every free coordinate moves by ``factor * beta * h`` with ``beta`` drawn
    uniformly from ``[-0.5, 0.5)`` and ``h`` the mesh size of the input.
    Boundary vertices and vertices on interface lines stay fixed. Draws that
    would invert or un-star an incident cell are repeated up to
    :data:`PERTURBATION_RETRIES` times, after which the last draw is halved
    until the cells are valid again.

    Args:
        mesh (PolyMesh): Valid input mesh.
        factor (float, optional): Relative displacement. Defaults to
            :data:`DEFAULT_PERTURBATION`.
        seed (int, optional): Seed of the ``PCG64`` generator.

    Returns:
        PolyMesh: Same topology, new vertex positions.

    Raises:
        PerturbationError: If a vertex cannot be placed even without
            displacement, i.e. the input mesh itself is invalid.
    """
    if factor < 0:
        raise MeshInputError("Perturbation factor must be >= 0, got {0}".format(factor))

    h = compute_geometry(mesh).h
    rng = np.random.Generator(np.random.PCG64(seed))
    vertices = np.array(mesh.vertices)
    incident = mesh.vertex_cells()
    clamped = 0

    for v in np.flatnonzero(~mesh.pinned_vertices()):
        origin = vertices[v].copy()

        for _ in range(PERTURBATION_RETRIES):
            step = factor * rng.uniform(-0.5, 0.5, size=mesh.dim) * h
            vertices[v] = origin + step
            if _cells_valid(mesh, vertices, incident[v]):
                break
        else:
            clamped += 1
            for scale in (0.5, 0.25, 0.125, 0.0):
                vertices[v] = origin + scale * step
                if _cells_valid(mesh, vertices, incident[v]):
                    break
            else:
                raise PerturbationError(int(v))

    if clamped:
        log.warning(
            "Clamped the displacement of {0} vertices after {1} retries".format(
                clamped, PERTURBATION_RETRIES
            )
        )

    return mesh.with_vertices(vertices)


def check_alignment(mesh, interfaces=None):
    """Return indices of cells straddling one of the interface lines.

    Args:
        mesh (PolyMesh): Mesh to check.
        interfaces (tuple, optional): Lines to check. Defaults to
            ``mesh.interfaces``.
    """
    if interfaces is None:
        interfaces = mesh.interfaces

    straddling = set()
    for axis, value in interfaces:
        coord = mesh.vertices[:, _axis_index(axis)]
        tol = INTERFACE_TOL * max(1.0, abs(value))
        for k, cell in enumerate(mesh.cells):
            values = coord[list(cell)]
            if values.min() < value - tol and values.max() > value + tol:
                straddling.add(k)

    return np.array(sorted(straddling), dtype=int)


def write_mesh(mesh, path):
    """Write `mesh` in the plain-text mesh format.

    Layout: header ``dim nv ne nk``; one vertex per line; one face per line
    as its vertex indices followed by owner and neighbor (``-1`` on the
    boundary); one cell per line as vertex count followed by vertex indices.
    Coordinates carry 17 significant digits.
    """
    lines = [
        "{0} {1} {2} {3}".format(mesh.dim, mesh.n_vertices, mesh.n_faces, mesh.n_cells)
    ]
    lines.extend(
        " ".join("{0:.17g}".format(x) for x in point) for point in mesh.vertices
    )
    lines.extend(
        " ".join(str(int(v)) for v in list(face) + list(cells))
        for face, cells in zip(mesh.faces, mesh.face_cells)
    )
    lines.extend(
        " ".join(str(v) for v in [len(cell)] + list(cell)) for cell in mesh.cells
    )

    with open(path, "w") as fp:
        fp.write("\n".join(lines) + "\n")


def read_mesh(path, interfaces=()):
    """Read a mesh written by :func:`write_mesh`.

    Raises:
        MeshFormatError: On malformed content.
    """
    with open(path) as fp:
        rows = [line.split() for line in fp if line.strip()]

    try:
        dim, nv, ne, nk = (int(token) for token in rows[0])
        if len(rows) != 1 + nv + ne + nk:
            raise ValueError(
                "expected {0} lines, found {1}".format(1 + nv + ne + nk, len(rows))
            )

        body = rows[1:]
        vertices = [[float(x) for x in row] for row in body[:nv]]
        face_rows = [[int(x) for x in row] for row in body[nv : nv + ne]]
        cells = []
        for row in body[nv + ne :]:
            count = int(row[0])
            if len(row) != count + 1:
                raise ValueError("cell line {0!r} has wrong length".format(row))
            cells.append([int(x) for x in row[1:]])
    except (ValueError, IndexError) as ex:
        raise MeshFormatError("Malformed mesh file {0}: {1}".format(path, ex))

    if any(len(row) != dim + 2 for row in face_rows):
        raise MeshFormatError("Face lines must carry {0} integers".format(dim + 2))

    faces = [row[:dim] for row in face_rows]
    face_cells = [row[dim:] for row in face_rows]

    try:
        return PolyMesh(
            dim,
            vertices,
            cells,
            faces=faces,
            face_cells=face_cells,
            interfaces=interfaces,
        )
    except MeshInputError as ex:
        raise MeshFormatError("Inconsistent mesh file {0}: {1}".format(path, ex))


def _structured_quads(X, Y, interfaces=()):
    ny, nx = X.shape[0] - 1, X.shape[1] - 1
    vertices = np.stack([np.ravel(X), np.ravel(Y)], axis=1)

    cells = []
    for j in range(ny):
        for i in range(nx):
            v00 = j * (nx + 1) + i
            v01 = v00 + nx + 1
            cells.append((v00, v00 + 1, v01 + 1, v01))

    return PolyMesh(2, vertices, cells, interfaces=interfaces)


def _grid_lines(nx, ny, domain, interfaces):
    _check_count(nx, "nx")
    _check_count(ny, "ny")
    x0, x1 = _check_bounds(domain[0], domain[1])
    y0, y1 = _check_bounds(domain[2], domain[3])

    snaps = {"x": [], "y": []}
    for axis, value in interfaces:
        _axis_index(axis)
        snaps[axis].append(value)

    return _grid_line(x0, x1, nx, snaps["x"]), _grid_line(y0, y1, ny, snaps["y"])


def _grid_line(lo, hi, n, snaps):
    line = lo + (hi - lo) * np.linspace(0.0, 1.0, n + 1)

    for value in snaps:
        if n < 2 or not lo < value < hi:
            raise MeshInputError(
                "Cannot snap a grid line of {0} cells on ({1}, {2}) to {3}".format(
                    n, lo, hi, value
                )
            )
        line[1 + int(np.argmin(np.abs(line[1:-1] - value)))] = value

    if not np.all(np.diff(line) > 0):
        raise MeshInputError("Interface snapping collapsed a grid column")

    return line


def _cells_valid(mesh, vertices, cells):
    for k in cells:
        points = vertices[list(mesh.cells[k])]

        if mesh.dim == 1:
            if not points[1, 0] > points[0, 0]:
                return False
            continue

        nxt = np.roll(points, -1, axis=0)
        cross = points[:, 0] * nxt[:, 1] - nxt[:, 0] * points[:, 1]
        area = 0.5 * cross.sum()
        if not area > 0.0:
            return False

        centroid = ((points + nxt) * cross[:, None]).sum(axis=0) / (6.0 * area)
        u = points - centroid
        v = nxt - centroid
        if not np.all(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0] > 0.0):
            return False

    return True


def _check_count(n, name):
    if int(n) != n or n < 1:
        raise MeshInputError(
            "{0} must be a positive integer, got {1!r}".format(name, n)
        )


def _check_bounds(lo, hi):
    lo, hi = float(lo), float(hi)
    if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
        raise MeshInputError("Degenerate domain bounds ({0}, {1})".format(lo, hi))
    return lo, hi


def _axis_index(axis):
    try:
        return {"x": 0, "y": 1}[axis]
    except KeyError:
        raise MeshInputError(
            "Interface axis must be 'x' or 'y', got {0!r}".format(axis)
        )
