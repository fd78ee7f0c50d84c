# -*- coding: utf-8 -*-

import numpy as np
import pytest

from hybridfv import (
    DiffusionTensorField,
    FaceVelocity,
    advective_cell_centered,
    advective_second_order_hybrid,
    advective_upwind_hybrid,
    compute_geometry,
    diffusion_local_operator,
    face_velocity,
    interpolate,
    limiter_phi,
    vanishing_diffusion,
)
from hybridfv.exceptions import FluxContractError, SchemeError, TensorError
from hybridfv.fluxes import (
    barth_jespersen,
    build_local_operators,
    cell_centered_advection,
    check_tensors,
    near_boundary_cells,
    reconstruction_increments,
    two_point_diffusion,
    upwind_gradient_operator,
)

from .fixtures import (
    GRADIENT_2D,
    affine,
    cartesian,
    cartesian_geom,
    constant_vector,
    mesh2d,
    parametrize,
    random_spd,
)


def rotation(p):
    x, y = p[:, 0], p[:, 1]
    return np.stack(
        [
            40.0 * x * (2.0 * y - 1.0) * (x - 1.0),
            -40.0 * y * (2.0 * x - 1.0) * (y - 1.0),
        ],
        axis=1,
    )


def local(q, geom, cell):
    faces = geom.pair_face[geom.pair_offsets[cell] : geom.pair_offsets[cell + 1]]
    return np.concatenate([[q.cell_values[cell]], q.face_values[faces]])


def cell_pairs(geom, cell):
    return np.arange(geom.pair_offsets[cell], geom.pair_offsets[cell + 1])


@parametrize("quadrature", ["midpoint", "gauss2"])
def test_face_velocity_is_antisymmetric(mesh2d, quadrature):
    geom = compute_geometry(mesh2d)
    fv = face_velocity(mesh2d, geom, rotation, quadrature)
    interior = np.flatnonzero(geom.pair_twin >= 0)

    assert np.array_equal(
        fv.pair_velocity[interior], -fv.pair_velocity[geom.pair_twin[interior]]
    )
    assert np.all(fv.plus * fv.minus == 0.0)
    assert np.allclose(fv.plus - fv.minus, fv.pair_velocity)


def test_face_velocity_constant(mesh2d):
    geom = compute_geometry(mesh2d)
    fv = face_velocity(mesh2d, geom, constant_vector([1.0, 2.0]))

    assert np.allclose(fv.pair_velocity, geom.pair_normal @ [1.0, 2.0])


def test_diffusion_flux_is_exact_for_affine(mesh2d):
    geom = compute_geometry(mesh2d)
    exact, _ = affine()
    q = interpolate(mesh2d, geom, exact)
    tensor = random_spd(2, seed=3)

    for cell in range(mesh2d.n_cells):
        block = diffusion_local_operator(geom, cell, tensor)
        pairs = cell_pairs(geom, cell)
        expected = -geom.pair_measure[pairs] * (
            geom.pair_normal[pairs] @ (tensor @ GRADIENT_2D)
        )

        assert block.shape == (len(pairs), len(pairs) + 1)
        assert np.allclose(block @ local(q, geom, cell), expected, atol=1e-12)
        assert np.allclose(block.sum(axis=1), 0.0, atol=1e-12)


def test_diffusion_bilinear_form_is_symmetric(mesh2d):
    geom = compute_geometry(mesh2d)
    tensor = random_spd(2, seed=1)

    for cell in (0, mesh2d.n_cells // 2):
        block = diffusion_local_operator(geom, cell, tensor)
        form = np.vstack([block.sum(axis=0, keepdims=True), -block])

        assert np.allclose(form, form.T, atol=1e-12)
        assert np.linalg.eigvalsh(form).min() > -1e-12


@parametrize(
    "tensor,message",
    [
        ([[1.0, 0.5], [0.0, 1.0]], "not symmetric"),
        ([[1.0, 2.0], [2.0, 1.0]], "not positive definite"),
        ([[0.0, 0.0], [0.0, 1.0]], "not positive definite"),
    ],
)
def test_invalid_tensor(cartesian_geom, tensor, message):
    with pytest.raises(TensorError) as exc_info:
        diffusion_local_operator(cartesian_geom, 3, tensor)

    assert exc_info.value.identifier == 0
    assert message in str(exc_info.value)


def test_tensor_bounds(cartesian_geom):
    field = DiffusionTensorField(lambda p: np.tile(3.0 * np.eye(2), (len(p), 1, 1)))
    assert field.cell_tensors(cartesian_geom).shape == (16, 2, 2)

    field.bounds = (1.0, 2.0)
    with pytest.raises(TensorError):
        field.cell_tensors(cartesian_geom)

    stack = np.stack([np.eye(2), np.diag([1.0, 5.0])])
    with pytest.raises(TensorError) as exc_info:
        check_tensors(stack, bounds=(0.5, 2.0))
    assert exc_info.value.identifier == 1


@parametrize(
    "tensor,speed,h,expected",
    [
        (np.eye(2), 2.0, 0.25, 1.25 * np.eye(2)),
        (np.diag([1e-6, 1.0]), 1.0, 0.01, np.diag([1e-6 + 1e-3, 1.0 + 1e-3])),
        (np.array([[2.0]]), 0.0, 0.5, np.array([[2.0]])),
    ],
)
def test_vanishing_diffusion(tensor, speed, h, expected):
    assert np.allclose(vanishing_diffusion(tensor, speed, h), expected, atol=1e-15)


def test_vanishing_diffusion_stack():
    tensors = np.stack([np.eye(2), random_spd(2)])
    shifted = vanishing_diffusion(tensors, [0.0, 4.0], 0.25)

    assert np.allclose(shifted[0], np.eye(2))
    assert np.allclose(
        np.linalg.eigvalsh(shifted[1]), np.linalg.eigvalsh(tensors[1]) + 0.5
    )


def test_upwind_block_on_constants(mesh2d):
    geom = compute_geometry(mesh2d)
    fv = face_velocity(mesh2d, geom, rotation)

    for cell in range(mesh2d.n_cells):
        block = advective_upwind_hybrid(geom, cell, fv)
        pairs = cell_pairs(geom, cell)
        flux = block @ np.ones(len(pairs) + 1)

        assert np.allclose(flux, geom.pair_measure[pairs] * fv.pair_velocity[pairs])


@parametrize("gradient", ["consistent", "stabilised"])
def test_second_order_block_is_exact_for_affine(mesh2d, gradient):
    geom = compute_geometry(mesh2d)
    fv = face_velocity(mesh2d, geom, constant_vector([1.0, 2.0]))
    exact, _ = affine()
    q = interpolate(mesh2d, geom, exact)

    for cell in range(mesh2d.n_cells):
        block = advective_second_order_hybrid(geom, cell, fv, gradient)
        pairs = cell_pairs(geom, cell)
        values = q.face_values[geom.pair_face[pairs]]
        expected = geom.pair_measure[pairs] * fv.pair_velocity[pairs] * values

        assert np.allclose(block @ local(q, geom, cell), expected, atol=1e-12)


def test_reconstruction_increments_unknown_gradient(cartesian_geom):
    with pytest.raises(SchemeError):
        reconstruction_increments(cartesian_geom, cartesian_geom.groups[0], "upwind")


def test_local_operator_phi(cartesian, cartesian_geom):
    fv = face_velocity(cartesian, cartesian_geom, constant_vector([1.0, 2.0]))
    tensors = np.tile(np.eye(2), (16, 1, 1))
    (op,) = build_local_operators(cartesian, cartesian_geom, tensors, fv)

    assert np.all(op.phi == 1.0)
    assert np.allclose(op.with_phi(np.zeros(16)).advective, op.upwind)
    assert np.allclose(op.advective, op.upwind + op.correction)

    exact, _ = affine()
    x = interpolate(cartesian, cartesian_geom, exact).to_vector()
    assert np.allclose(op.recompute(x).phi, 1.0)

    (first,) = build_local_operators(
        cartesian, cartesian_geom, tensors, fv, second_order=False
    )
    assert first.increments is None
    assert first.recompute(x) is first
    assert np.array_equal(first.matrix, first.diffusive + first.upwind)


def test_barth_jespersen_bounds():
    rng = np.random.Generator(np.random.PCG64(11))
    values = rng.normal(size=(200, 5))
    deltas = rng.normal(size=(200, 4))

    phi = barth_jespersen(values, deltas)
    limited = values[:, :1] + phi[:, None] * deltas

    assert np.all((phi >= 0.0) & (phi <= 1.0))
    assert np.all(limited <= values.max(axis=1, keepdims=True) + 1e-12)
    assert np.all(limited >= values.min(axis=1, keepdims=True) - 1e-12)


@parametrize(
    "values,deltas,expected",
    [
        ([1.0, 0.5, 0.2], [0.3, -0.1], 0.0),
        ([0.5, 1.0, 0.0], [0.0, 0.0], 1.0),
        ([0.5, 1.0, 0.0], [0.25, -0.25], 1.0),
        ([0.5, 1.0, 0.0], [1.0, -0.25], 0.5),
        ([0.5, 1.0, 0.0], [0.25, -1.0], 0.5),
    ],
)
def test_barth_jespersen_values(values, deltas, expected):
    assert barth_jespersen(values, deltas)[0] == pytest.approx(expected)


def test_limiter_phi_keeps_affine_data(mesh2d):
    geom = compute_geometry(mesh2d)
    exact, _ = affine()
    q = interpolate(mesh2d, geom, exact)

    for group in geom.groups:
        phi = limiter_phi(geom, group, q.local_values(geom, group))
        assert np.all(phi > 1.0 - 1e-9)


@parametrize(
    "treatment,expected",
    [
        ("mirror", list(range(16))),
        ("inflow", [5, 6, 7, 9, 10, 11, 13, 14, 15]),
        ("boundary", [5, 6, 9, 10]),
    ],
)
def test_near_boundary_cells(cartesian, cartesian_geom, treatment, expected):
    fv = face_velocity(cartesian, cartesian_geom, constant_vector([1.0, 2.0]))
    flagged = near_boundary_cells(cartesian, cartesian_geom, fv, treatment)

    assert np.flatnonzero(~flagged).tolist() == expected


def test_near_boundary_cells_unknown_treatment(cartesian, cartesian_geom):
    fv = face_velocity(cartesian, cartesian_geom, constant_vector([1.0, 2.0]))

    with pytest.raises(SchemeError):
        near_boundary_cells(cartesian, cartesian_geom, fv, "ghost")


def test_cell_centered_contract(cartesian, cartesian_geom):
    fv = face_velocity(cartesian, cartesian_geom, constant_vector([1.0, 2.0]))

    with pytest.raises(FluxContractError) as exc_info:
        cell_centered_advection(
            cartesian,
            cartesian_geom,
            fv,
            np.ones(16, dtype=bool),
            boundary="boundary",
        )

    assert exc_info.value.identifier == 0


def test_cell_centered_advection_on_constants(mesh2d):
    geom = compute_geometry(mesh2d)
    fv = face_velocity(mesh2d, geom, rotation)
    flux = advective_cell_centered(
        mesh2d, geom, fv, np.ones(mesh2d.n_cells), np.ones(mesh2d.n_faces)
    )

    assert np.allclose(flux, fv.pair_velocity)


def test_cell_centered_advection_is_conservative(mesh2d):
    geom = compute_geometry(mesh2d)
    fv = face_velocity(mesh2d, geom, rotation)
    x = np.random.Generator(np.random.PCG64(0)).normal(
        size=mesh2d.n_cells + mesh2d.n_faces
    )
    flux = cell_centered_advection(mesh2d, geom, fv) @ x
    interior = geom.face_pairs[geom.face_pairs[:, 1] >= 0]

    assert np.allclose(flux[interior[:, 0]] + flux[interior[:, 1]], 0.0, atol=1e-12)


def test_upwind_gradient_operator(cartesian, cartesian_geom):
    fv = face_velocity(cartesian, cartesian_geom, constant_vector([1.0, 2.0]))
    operator = upwind_gradient_operator(cartesian, cartesian_geom, fv)

    assert operator.shape == (32, 56)
    assert np.allclose(operator @ np.ones(56), 0.0)


def test_upwind_gradient_operator_is_exact_for_affine_data(cartesian, cartesian_geom):
    exact, _ = affine()
    q = interpolate(cartesian, cartesian_geom, exact)
    fv = face_velocity(cartesian, cartesian_geom, constant_vector([1.0, 2.0]))
    gradient = upwind_gradient_operator(cartesian, cartesian_geom, fv) @ q.to_vector()

    assert np.allclose(gradient.reshape(16, 2), GRADIENT_2D, atol=1e-12)


def test_upwind_gradient_operator_skips_tangential_faces(cartesian, cartesian_geom):
    fv = face_velocity(cartesian, cartesian_geom, constant_vector([1.0, 0.0]))
    q = interpolate(cartesian, cartesian_geom, affine()[0])
    gradient = upwind_gradient_operator(cartesian, cartesian_geom, fv) @ q.to_vector()

    # Faces with V·n = 0 are not upwind, so no y-derivative is seen.
    assert np.allclose(gradient.reshape(16, 2)[:, 0], GRADIENT_2D[0], atol=1e-12)
    assert np.allclose(gradient.reshape(16, 2)[:, 1], 0.0)


def test_two_point_diffusion(cartesian, cartesian_geom):
    exact, _ = affine()
    q = interpolate(cartesian, cartesian_geom, exact)
    tensors = np.tile(np.eye(2), (16, 1, 1))
    flux = two_point_diffusion(cartesian, cartesian_geom, tensors) @ q.to_vector()

    assert np.allclose(
        flux,
        -cartesian_geom.pair_measure * (cartesian_geom.pair_normal @ GRADIENT_2D),
        atol=1e-12,
    )


def test_face_velocity_wrapper(cartesian_geom):
    fv = FaceVelocity(cartesian_geom, np.arange(40.0))

    assert np.allclose(
        np.abs(fv.pair_velocity), cartesian_geom.pair_face.astype(float)
    )
