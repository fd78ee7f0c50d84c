# -*- coding: utf-8 -*-

import numpy as np
import pytest

from hybridfv import (
    PolyMesh,
    build_cartesian,
    build_family,
    build_interval,
    build_kershaw,
    build_triangular,
    check_alignment,
    compute_geometry,
    perturb_mesh,
    read_mesh,
    regularity,
    write_mesh,
)
from hybridfv.exceptions import DegenerateCellError, MeshFormatError, MeshInputError
from hybridfv.study import DOF_TABLE

from .fixtures import (
    cartesian,
    cartesian_geom,
    interval,
    mesh2d,
    parametrize,
)


@parametrize(
    "mesh,n_cells,n_faces,n_boundary",
    [
        (build_cartesian(4, 4), 16, 40, 16),
        (build_triangular(4, 4), 32, 56, 16),
        (build_kershaw(6, 6), 36, 84, 24),
        (build_interval(10), 10, 11, 2),
    ],
)
def test_builder_counts(mesh, n_cells, n_faces, n_boundary):
    assert mesh.n_cells == n_cells
    assert mesh.n_faces == n_faces
    assert mesh.n_boundary_faces == n_boundary


@parametrize("level", [1, 2, 3])
def test_cartesian_family_dofs(level):
    h, n_cells, n_faces, hybrid, cell_centered = DOF_TABLE[level]
    mesh = build_family("M1", level)
    geom = compute_geometry(mesh)

    assert mesh.n_cells == n_cells
    assert mesh.n_faces == n_faces
    assert mesh.n_cells + mesh.n_faces == hybrid
    assert mesh.n_cells + mesh.n_boundary_faces == cell_centered
    assert geom.h == pytest.approx(h, rel=1e-3)


@parametrize(
    "name,level,n_cells",
    [
        ("M1", 2, 64),
        ("M2", 1, 32),
        ("M3", 1, 16),
        ("M4", 1, 32),
        ("M5", 1, 36),
        ("M5", 2, 144),
        ("I1", 1, 100),
        ("I1", 2, 200),
    ],
)
def test_build_family(name, level, n_cells):
    assert build_family(name, level).n_cells == n_cells


@parametrize(
    "args,kwargs",
    [
        (("M9", 1), {}),
        (("M1", 0), {}),
        (("M5", 1), {"interfaces": (("x", 2.0 / 3.0),)}),
    ],
)
def test_build_family_errors(args, kwargs):
    with pytest.raises(MeshInputError):
        build_family(*args, **kwargs)


@parametrize(
    "nx,ny,distortion",
    [(6, 5, 0.1), (6, 6, 0.6), (6, 6, -0.1)],
)
def test_kershaw_errors(nx, ny, distortion):
    with pytest.raises(MeshInputError):
        build_kershaw(nx, ny, distortion)


def test_euler_characteristic(mesh2d):
    assert mesh2d.euler_characteristic() == 1


def test_geometry_identities(mesh2d):
    geom = compute_geometry(mesh2d)

    assert geom.cell_measure.sum() == pytest.approx(1.0, abs=1e-13)

    closure = np.zeros((mesh2d.n_cells, 2))
    np.add.at(closure, geom.pair_cell, geom.pair_measure[:, None] * geom.pair_normal)
    assert np.abs(closure).max() < 1e-13

    # sum |σ| n (x_σ - x_K)' = |K| I
    moment = np.zeros((mesh2d.n_cells, 2, 2))
    np.add.at(
        moment,
        geom.pair_cell,
        geom.pair_measure[:, None, None]
        * geom.pair_normal[:, :, None]
        * geom.pair_delta[:, None, :],
    )
    expected = geom.cell_measure[:, None, None] * np.eye(2)
    assert np.allclose(moment, expected, atol=1e-13)

    hulls = np.bincount(geom.pair_cell, geom.pair_hull, mesh2d.n_cells)
    assert np.allclose(hulls, geom.cell_measure, atol=1e-13)
    assert np.allclose(
        geom.pair_hull, 0.5 * geom.pair_measure * geom.pair_distance, atol=1e-13
    )


def test_pair_twins_have_opposite_normals(mesh2d):
    geom = compute_geometry(mesh2d)
    interior = np.flatnonzero(geom.pair_twin >= 0)

    assert len(interior) == 2 * (mesh2d.n_faces - mesh2d.n_boundary_faces)
    assert np.all(geom.pair_twin[geom.pair_twin[interior]] == interior)
    assert np.allclose(
        geom.pair_normal[interior] + geom.pair_normal[geom.pair_twin[interior]], 0.0
    )
    assert np.all(geom.pair_distance > 0.0)


def test_interval_geometry(interval):
    geom = compute_geometry(interval)

    assert np.allclose(geom.cell_measure, 0.1)
    assert np.allclose(geom.cell_centroid[:, 0], 0.05 + 0.1 * np.arange(10))
    assert np.allclose(geom.pair_hull, 0.05)
    assert np.allclose(geom.face_measure, 1.0)
    assert geom.h == pytest.approx(0.1)


def test_regularity(cartesian, cartesian_geom):
    report = regularity(cartesian, cartesian_geom)

    assert report.distance_ratio == pytest.approx(1.0)
    assert report.boundary_ratio == pytest.approx(2.0 * np.sqrt(2.0))
    assert report.max_faces == 4
    assert report.regul == pytest.approx(4.0)


def test_clockwise_cell_is_degenerate():
    mesh = PolyMesh(2, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [(0, 2, 1)])

    with pytest.raises(DegenerateCellError) as exc_info:
        compute_geometry(mesh)

    assert exc_info.value.identifier == 0
    assert exc_info.value.code == "degenerate-cell"


@parametrize(
    "dim,vertices,cells",
    [
        (3, [[0.0, 0.0, 0.0]], [(0,)]),
        (2, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [(0, 1, 1)]),
        (2, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [(0, 1, 5)]),
        (2, [[0.0, 0.0], [1.0, 0.0], [0.0, np.nan]], [(0, 1, 2)]),
        (2, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], []),
        (
            2,
            [[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]],
            [(0, 1, 2), (1, 0, 3), (0, 1, 4)],
        ),
    ],
)
def test_invalid_mesh_input(dim, vertices, cells):
    with pytest.raises(MeshInputError):
        PolyMesh(dim, vertices, cells)


def test_perturb_mesh_is_seeded():
    mesh = build_cartesian(8, 8)
    h = compute_geometry(mesh).h

    first = perturb_mesh(mesh, 0.4, seed=7)
    second = perturb_mesh(mesh, 0.4, seed=7)
    other = perturb_mesh(mesh, 0.4, seed=8)

    assert np.array_equal(first.vertices, second.vertices)
    assert not np.array_equal(first.vertices, other.vertices)

    boundary = mesh.boundary_vertices
    shift = np.abs(first.vertices - mesh.vertices)
    assert np.all(shift[boundary] == 0.0)
    assert shift[~boundary].max() > 0.0
    assert shift.max() <= 0.2 * h + 1e-15

    compute_geometry(first)


def test_perturb_mesh_keeps_interfaces():
    interfaces = (("x", 2.0 / 3.0), ("y", 2.0 / 3.0))
    mesh = perturb_mesh(build_cartesian(6, 6, interfaces=interfaces), 0.4, seed=1)

    assert len(check_alignment(mesh)) == 0
    assert np.count_nonzero(np.isclose(mesh.vertices[:, 0], 2.0 / 3.0)) == 7


def test_perturb_mesh_negative_factor(cartesian):
    with pytest.raises(MeshInputError):
        perturb_mesh(cartesian, -1.0)


def test_check_alignment():
    interfaces = (("x", 2.0 / 3.0),)

    assert list(check_alignment(build_cartesian(4, 4), interfaces)) == [
        2,
        6,
        10,
        14,
    ]
    assert len(check_alignment(build_cartesian(4, 4, interfaces=interfaces))) == 0


@parametrize(
    "mesh",
    [
        perturb_mesh(build_triangular(4, 4), 0.4, seed=2),
        build_kershaw(6, 6),
        build_interval(5),
    ],
)
def test_mesh_file_round_trip(tmp_path, mesh):
    path = str(tmp_path / "mesh.txt")
    write_mesh(mesh, path)
    loaded = read_mesh(path)

    assert loaded.dim == mesh.dim
    assert np.array_equal(loaded.vertices, mesh.vertices)
    assert np.array_equal(loaded.faces, mesh.faces)
    assert np.array_equal(loaded.face_cells, mesh.face_cells)
    assert loaded.cells == mesh.cells


@parametrize(
    "text",
    [
        "2 3 3 1\n0 0\n1 0\n",
        "2 3 3 1\n0 0\n1 0\n0 1\n0 1 0 -1\n1 2 0 -1\n2 0 0 -1\n4 0 1 2\n",
        "2 3 3 1\n0 0\n1 0\n0 1\n0 1 0 -1\n1 2 0 -1\n2 0 1 -1\n3 0 1 2\n",
        "two 3 3 1\n",
    ],
)
def test_read_mesh_errors(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)

    with pytest.raises(MeshFormatError):
        read_mesh(str(path))
