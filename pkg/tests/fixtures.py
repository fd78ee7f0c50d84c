# -*- coding: utf-8 -*-

import json

import numpy as np
import pytest

from hybridfv import (
    DiffusionTensorField,
    ProblemSpec,
    build_cartesian,
    build_interval,
    build_kershaw,
    build_triangular,
    compute_geometry,
    perturb_mesh,
)


# pytest.mark is a generator so create alias for convenience
parametrize = pytest.mark.parametrize


GRADIENT_2D = (0.7, -0.3)
OFFSET = 0.2


MESH_BUILDERS = {
    "cartesian": lambda: build_cartesian(4, 4),
    "triangular": lambda: build_triangular(4, 4),
    "perturbed": lambda: perturb_mesh(build_cartesian(4, 4), 0.4, seed=3),
    "perturbed-triangular": lambda: perturb_mesh(
        build_triangular(4, 4), 0.4, seed=5
    ),
    "kershaw": lambda: build_kershaw(6, 6),
}


def constant_tensor(tensor):
    tensor = np.asarray(tensor, dtype=float)
    return lambda p: np.broadcast_to(tensor, (len(p),) + tensor.shape).copy()


def constant_vector(vector):
    vector = np.asarray(vector, dtype=float)
    return lambda p: np.broadcast_to(vector, (len(p), len(vector))).copy()


def affine(gradient=GRADIENT_2D, offset=OFFSET):
    """Return ``(c, ∇c)`` of ``c(x) = offset + gradient·x``."""
    gradient = np.asarray(gradient, dtype=float)

    def exact(p):
        return offset + p @ gradient

    def exact_gradient(p):
        return np.broadcast_to(gradient, (len(p), len(gradient))).copy()

    return exact, exact_gradient


def affine_problem(
    gradient=GRADIENT_2D, offset=OFFSET, tensor=None, velocity=None, name="affine"
):
    """Problem with an affine exact solution, constant ``Λ`` and constant ``V``.

    The source is ``V·∇c`` so the interpolant of ``c`` solves every
    second-order hybrid scheme exactly.
    """
    dim = len(gradient)
    tensor = np.eye(dim) if tensor is None else np.asarray(tensor, dtype=float)
    velocity = np.zeros(dim) if velocity is None else np.asarray(velocity, float)
    exact, exact_gradient = affine(gradient, offset)
    source_value = float(np.dot(velocity, gradient))

    return ProblemSpec(
        name,
        dim,
        (0.0, 1.0) if dim == 1 else (0.0, 1.0, 0.0, 1.0),
        DiffusionTensorField(constant_tensor(tensor)),
        constant_vector(velocity),
        lambda p: np.full(len(p), source_value),
        exact,
        exact=exact,
        exact_gradient=exact_gradient,
        divergence=lambda p: np.zeros(len(p)),
    )


def read_json(path):
    with open(path) as fp:
        return json.load(fp)


def random_spd(dim, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    a = rng.uniform(-1.0, 1.0, size=(dim, dim))
    return a @ a.T + dim * np.eye(dim)


@pytest.fixture
def cartesian():
    return build_cartesian(4, 4)


@pytest.fixture
def cartesian_geom(cartesian):
    return compute_geometry(cartesian)


@pytest.fixture
def interval():
    return build_interval(10)


@pytest.fixture(params=sorted(MESH_BUILDERS))
def mesh2d(request):
    return MESH_BUILDERS[request.param]()


@pytest.fixture
def diffusion_problem():
    return affine_problem()


@pytest.fixture
def advection_problem():
    return affine_problem(tensor=[[1e-2, 0.0], [0.0, 2e-2]], velocity=(1.0, 2.0))
