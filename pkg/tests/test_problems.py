# -*- coding: utf-8 -*-

import numpy as np
import pytest

from hybridfv import (
    DiffusionTensorField,
    HybridField,
    ProblemSpec,
    build_cartesian,
    compute_geometry,
    error_metrics,
    interpolate,
    make_problem,
    observed_order,
    overshoot,
    problem_boundary_layer_2d,
    problem_eps_1d,
    problem_hetero_rotation,
    problem_smooth_2d,
)
from hybridfv.exceptions import ProblemError
from hybridfv.problems import (
    PROBLEMS,
    check_divergence,
    flux_divergence,
    sample_points,
)

from .fixtures import (
    cartesian,
    cartesian_geom,
    constant_tensor,
    diffusion_problem,
    mesh2d,
    parametrize,
)


@parametrize("eps", [2.0 ** -4, 2.0 ** -10])
def test_eps_problem_boundary_values(eps):
    problem = problem_eps_1d(eps)
    values = problem.exact(np.array([[0.0], [0.5], [1.0]]))

    assert values[0] == pytest.approx(1.0)
    assert values[2] == pytest.approx(0.0, abs=1e-15)
    assert 0.0 < values[1] < 1.0
    assert problem.bounds == (0.0, 1.0)
    assert problem.params == {"eps": eps}


@parametrize(
    "factory,value",
    [(problem_eps_1d, 0.0), (problem_eps_1d, -1.0), (problem_boundary_layer_2d, 0.0)],
)
def test_problem_parameter_errors(factory, value):
    with pytest.raises(ProblemError):
        factory(value)


def test_make_problem():
    assert make_problem("eps1d", eps=0.5).params["eps"] == 0.5
    assert make_problem("boundary-layer", nu=0.01).params["nu"] == 0.01
    assert make_problem("smooth").name == "smooth"
    assert make_problem("hetero").interfaces == (("x", 2.0 / 3.0), ("y", 2.0 / 3.0))

    with pytest.raises(ProblemError) as exc_info:
        make_problem("poisson")

    assert exc_info.value.code == "problem"


@parametrize("name", sorted(PROBLEMS))
def test_catalog_velocities_are_divergence_free(name):
    values = check_divergence(make_problem(name))
    assert np.allclose(values, 0.0)


def test_check_divergence_uses_central_differences():
    problem = ProblemSpec(
        "compressing",
        2,
        (0.0, 1.0, 0.0, 1.0),
        DiffusionTensorField(constant_tensor(np.eye(2))),
        lambda p: np.stack([-p[:, 0], np.zeros(len(p))], axis=1),
        lambda p: np.zeros(len(p)),
        lambda p: np.zeros(len(p)),
    )

    with pytest.raises(ProblemError) as exc_info:
        check_divergence(problem)

    assert "div V" in str(exc_info.value)

    problem.velocity = lambda p: np.stack([p[:, 0], p[:, 1]], axis=1)
    assert np.allclose(check_divergence(problem), 2.0)


@parametrize(
    "problem,tol",
    [
        (problem_smooth_2d(), 1e-6),
        (problem_boundary_layer_2d(0.1), 1e-4),
        (problem_eps_1d(2.0 ** -4), 1e-4),
    ],
)
def test_source_matches_flux_divergence(problem, tol):
    points = sample_points(problem, 50, seed=1, margin=0.05)

    assert np.allclose(
        flux_divergence(problem, points), problem.source(points), rtol=tol, atol=tol
    )


def test_flux_divergence_needs_exact_solution():
    with pytest.raises(ProblemError):
        flux_divergence(problem_hetero_rotation(), np.full((3, 2), 0.5))


def test_hetero_tensor_quadrants():
    problem = problem_hetero_rotation()
    points = np.array([[0.2, 0.2], [0.8, 0.2], [0.2, 0.8], [0.8, 0.8]])
    tensors = problem.diffusion.sample(points)

    assert np.allclose(tensors[0], tensors[3])
    assert np.allclose(tensors[1], tensors[2])
    assert np.allclose(np.diag(tensors[0]), [1e-6, 1.0])
    assert np.allclose(np.diag(tensors[1]), [1.0, 1e-6])
    assert not problem.has_exact


def test_boundary_layer_subdomain():
    mesh = build_cartesian(5, 5)
    mask = problem_boundary_layer_2d().subdomain_mask(
        compute_geometry(mesh).cell_centroid
    )

    assert np.count_nonzero(mask) == 16
    assert np.all(problem_smooth_2d().subdomain_mask(np.zeros((4, 2))))


def test_error_metrics_of_interpolant(mesh2d, diffusion_problem):
    geom = compute_geometry(mesh2d)
    q = interpolate(mesh2d, geom, diffusion_problem.exact)

    centroid = error_metrics(mesh2d, geom, q, diffusion_problem)
    consistent = error_metrics(
        mesh2d, geom, q, diffusion_problem, error_gradient="consistent"
    )
    quadrature = error_metrics(
        mesh2d, geom, q, diffusion_problem, solution_norm="quadrature"
    )

    assert centroid.E_c < 1e-12
    assert centroid.E_g < 1e-12
    assert consistent.E_g < 1e-12
    assert quadrature.E_c > 1e-3
    assert centroid.dofs == mesh2d.n_cells + mesh2d.n_faces
    assert centroid.overshoot is None


def test_error_metrics_subdomain_keeps_full_norms():
    mesh = build_cartesian(5, 5)
    geom = compute_geometry(mesh)
    problem = problem_boundary_layer_2d()
    whole = problem_boundary_layer_2d()
    whole.subdomain = None
    q = interpolate(mesh, geom, problem.exact)
    shifted = HybridField(q.cell_values + 1.0, q.face_values)

    inside = error_metrics(mesh, geom, shifted, problem)
    everywhere = error_metrics(mesh, geom, shifted, whole)

    # 16 of the 25 cells have their centroid in the subdomain.
    assert inside.E_c == pytest.approx(0.8 * everywhere.E_c)
    assert inside.E_g <= everywhere.E_g


def test_error_metrics_centroid_gradient(cartesian, cartesian_geom):
    problem = problem_smooth_2d()
    q = interpolate(cartesian, cartesian_geom, problem.exact)

    centroid = error_metrics(cartesian, cartesian_geom, q, problem)
    quadrature = error_metrics(
        cartesian, cartesian_geom, q, problem, solution_norm="quadrature"
    )

    assert centroid.E_c == 0.0
    assert 0.0 < centroid.E_g < quadrature.E_g


def test_error_metrics_cell_centered(cartesian, cartesian_geom, diffusion_problem):
    q = interpolate(cartesian, cartesian_geom, diffusion_problem.exact)
    gradient = np.tile([0.7, -0.3], (16, 1))

    report = error_metrics(
        cartesian,
        cartesian_geom,
        q,
        diffusion_problem,
        scheme="cellcentered2",
        gradient=gradient,
    )
    assert report.dofs == 32
    assert report.E_g < 1e-12

    with pytest.raises(ProblemError):
        error_metrics(
            cartesian, cartesian_geom, q, diffusion_problem, scheme="cellcentered2"
        )


@parametrize("kwargs", [{"solution_norm": "max"}, {"error_gradient": "upwind"}])
def test_error_metrics_errors(cartesian, cartesian_geom, diffusion_problem, kwargs):
    q = interpolate(cartesian, cartesian_geom, diffusion_problem.exact)

    with pytest.raises(ProblemError):
        error_metrics(cartesian, cartesian_geom, q, diffusion_problem, **kwargs)


def test_error_metrics_without_exact_solution(cartesian, cartesian_geom):
    q = HybridField(np.linspace(0.0, 1.0, 16), np.zeros(40))
    report = error_metrics(cartesian, cartesian_geom, q, problem_hetero_rotation())

    assert report.E_c is None
    assert report.E_g is None
    assert report.overshoot is None
    assert report.maximum == 1.0
    assert report.minimum == 0.0


def test_error_metrics_overshoot(cartesian, cartesian_geom):
    values = np.full(16, 0.5)
    values[3] = 1.1
    values[7] = -0.05
    report = error_metrics(
        cartesian,
        cartesian_geom,
        HybridField(values, np.zeros(40)),
        problem_smooth_2d(),
    )

    assert report.overshoot.over == pytest.approx(0.1)
    assert report.overshoot.under == pytest.approx(0.05)


@parametrize(
    "values,lower,upper,expected",
    [
        ([0.0, 0.5, 1.0], 0.0, 1.0, (0.0, 0.0, 0.0, 0.0)),
        ([-0.2, 1.1], 0.0, 1.0, (0.1, 0.2, 0.1, 0.2)),
        ([1.0, 3.0], 0.0, 2.0, (1.0, 0.0, 0.5, 0.0)),
    ],
)
def test_overshoot(values, lower, upper, expected):
    assert np.allclose(overshoot(None, values, lower, upper), expected)


def test_overshoot_errors(cartesian):
    with pytest.raises(ProblemError):
        overshoot(cartesian, np.zeros(15), 0.0, 1.0)

    with pytest.raises(ProblemError):
        overshoot(None, np.zeros(3), 1.0, 1.0)


@parametrize(
    "errors,hs,expected",
    [
        ([1e-2, 2.5e-3, 6.25e-4], [0.4, 0.2, 0.1], [2.0, 2.0]),
        ([0.4, 0.2], [0.1, 0.05], [1.0]),
        ([0.4, 0.0, 0.1], [0.4, 0.2, 0.1], [None, None]),
        ([None, 0.2], [0.1, 0.05], [None]),
    ],
)
def test_observed_order(errors, hs, expected):
    assert observed_order(errors, hs) == expected


@parametrize(
    "errors,hs",
    [([0.1], [0.1]), ([0.1, 0.05], [0.1]), ([0.1, 0.05], [0.05, 0.1])],
)
def test_observed_order_errors(errors, hs):
    with pytest.raises(ProblemError):
        observed_order(errors, hs)
