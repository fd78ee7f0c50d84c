# -*- coding: utf-8 -*-

import numpy as np
import pytest

from hybridfv import (
    HybridField,
    compute_geometry,
    consistent_gradient,
    gradients,
    interpolate,
    norm_h1_like,
    norm_l2,
    reconstruct,
)
from hybridfv.exceptions import FieldError, InterpolationError
from hybridfv.hybrid_space import (
    cell_averages,
    evaluate_field,
    face_averages,
    face_quadrature,
    local_gradient_operators,
    norm_gradient,
    subcell_quadrature,
)

from .fixtures import (
    GRADIENT_2D,
    affine,
    cartesian,
    cartesian_geom,
    interval,
    mesh2d,
    parametrize,
)


def random_field(mesh, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    return HybridField(rng.normal(size=mesh.n_cells), rng.normal(size=mesh.n_faces))


def test_field_vector_layout(cartesian):
    field = random_field(cartesian)
    vector = field.to_vector()

    assert len(field) == 56
    assert np.array_equal(vector[:16], field.cell_values)
    assert np.array_equal(vector[16:], field.face_values)

    again = HybridField.from_vector(vector, cartesian.n_cells)
    assert np.array_equal(again.face_values, field.face_values)


@parametrize(
    "cell_values,face_values",
    [
        (np.zeros(15), np.zeros(40)),
        (np.zeros(16), np.zeros(41)),
        (np.zeros(16), np.full(40, np.inf)),
    ],
)
def test_field_validate(cartesian, cell_values, face_values):
    with pytest.raises(FieldError):
        HybridField(cell_values, face_values).validate(cartesian)


def test_affine_gradients_are_exact(mesh2d):
    geom = compute_geometry(mesh2d)
    exact, _ = affine()
    q = interpolate(mesh2d, geom, exact)
    grads = gradients(mesh2d, geom, q)

    assert np.allclose(grads.consistent, GRADIENT_2D, atol=1e-12)
    assert np.abs(grads.stabilisation).max() < 1e-12
    assert np.allclose(grads.stabilised, GRADIENT_2D, atol=1e-12)


def test_affine_gradient_1d(interval):
    geom = compute_geometry(interval)
    exact, _ = affine(gradient=(-1.5,), offset=2.0)
    grads = gradients(interval, geom, interpolate(interval, geom, exact))

    assert np.allclose(grads.consistent, -1.5)
    assert np.abs(grads.stabilisation).max() < 1e-12


def test_stabilisation_is_orthogonal_to_constants(mesh2d):
    geom = compute_geometry(mesh2d)
    grads = gradients(mesh2d, geom, random_field(mesh2d, seed=4))

    weighted = geom.pair_hull[:, None] * grads.stabilisation
    totals = np.zeros((mesh2d.n_cells, 2))
    np.add.at(totals, geom.pair_cell, weighted)
    scale = np.abs(weighted).max()
    assert np.abs(totals).max() <= 1e-12 * scale


def test_consistent_part_bound(mesh2d):
    geom = compute_geometry(mesh2d)
    for seed in range(5):
        q = random_field(mesh2d, seed)
        consistent = consistent_gradient(mesh2d, geom, q)
        lhs = (geom.cell_measure * (consistent ** 2).sum(axis=1)).sum()
        assert lhs <= 2.0 * norm_h1_like(mesh2d, geom, q) ** 2 * (1.0 + 1e-12)


def test_local_operators_match_field_gradients(mesh2d):
    geom = compute_geometry(mesh2d)
    q = random_field(mesh2d, seed=2)
    grads = gradients(mesh2d, geom, q)

    for group in geom.groups:
        G, B = local_gradient_operators(geom, group)
        values = q.local_values(geom, group)

        assert np.allclose(
            np.einsum("mdk,mk->md", G, values), grads.consistent[group.cells]
        )
        assert np.allclose(
            np.einsum("mjdk,mk->mjd", B, values), grads.stabilised[group.pairs]
        )


def test_norms(cartesian, cartesian_geom):
    ones = HybridField(np.ones(16), np.ones(40))

    assert norm_l2(cartesian, cartesian_geom, ones) == pytest.approx(1.0)
    assert norm_h1_like(cartesian, cartesian_geom, ones) == 0.0
    assert norm_l2(cartesian, cartesian_geom, ones.scaled(-3.0)) == pytest.approx(
        3.0
    )
    assert np.array_equal(reconstruct(ones), np.ones(16))

    q = random_field(cartesian, seed=1)
    assert norm_h1_like(cartesian, cartesian_geom, q.scaled(2.0)) == pytest.approx(
        2.0 * norm_h1_like(cartesian, cartesian_geom, q)
    )


def test_norm_gradient_of_constant_gradient(mesh2d):
    geom = compute_geometry(mesh2d)
    pair_gradients = np.tile(GRADIENT_2D, (geom.n_pairs, 1))

    assert norm_gradient(geom, pair_gradients) == pytest.approx(
        np.sqrt(0.7 ** 2 + 0.3 ** 2)
    )


def test_subcell_quadrature_weights(mesh2d):
    geom = compute_geometry(mesh2d)
    points, weights = subcell_quadrature(mesh2d, geom)

    assert points.shape == (geom.n_pairs, 3, 2)
    assert np.allclose(weights.sum(axis=1), geom.pair_hull)


def test_cell_averages_of_quadratic(cartesian, cartesian_geom):
    averages = cell_averages(cartesian, cartesian_geom, lambda p: p[:, 0] ** 2)
    x = cartesian_geom.cell_centroid[:, 0]

    # Mean of x² over [a, a + 1/4] is x_K² + (1/4)²/12.
    assert np.allclose(averages, x ** 2 + 0.0625 / 12.0)


@parametrize("rule", ["midpoint", "gauss2"])
def test_face_averages_of_affine(mesh2d, rule):
    geom = compute_geometry(mesh2d)
    exact, _ = affine()

    averages = face_averages(mesh2d, geom, exact, rule)
    assert np.allclose(averages, exact(geom.face_center))


def test_face_quadrature_unknown_rule(cartesian, cartesian_geom):
    with pytest.raises(FieldError):
        face_quadrature(cartesian, cartesian_geom, "simpson")


@parametrize(
    "func",
    [
        lambda p: 1.0 / 0.0,
        lambda p: np.ones(len(p) + 1),
        lambda p: np.where(p[:, 0] > 0.5, np.nan, 1.0),
    ],
)
def test_evaluate_field_errors(func):
    points = np.array([[0.25, 0.25], [0.75, 0.25]])

    with pytest.raises(InterpolationError):
        evaluate_field(func, points)


def test_evaluate_field_broadcasts_scalars():
    values = evaluate_field(lambda p: 2.0, np.zeros((3, 2)))
    assert np.array_equal(values, [2.0, 2.0, 2.0])
