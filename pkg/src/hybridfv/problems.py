# -*- coding: utf-8 -*-
"""
Test problems and error metrics.

Every problem solves ``div(-Λ∇c + cV) = f`` with Dirichlet data ``g``. Data
are vectorised callables on point arrays of shape ``(N, dim)``: scalars
return ``(N,)``, velocities ``(N, dim)`` and tensors ``(N, dim, dim)``.
"""

from collections import namedtuple
import logging

import numpy as np

from .exceptions import ProblemError
from .fluxes import DiffusionTensorField
from .hybrid_space import evaluate_field, gradients, subcell_quadrature
from .mesh import UNIT_INTERVAL, UNIT_SQUARE


__all__ = (
    "ProblemSpec",
    "ErrorReport",
    "Overshoot",
    "PROBLEMS",
    "make_problem",
    "problem_eps_1d",
    "problem_smooth_2d",
    "problem_boundary_layer_2d",
    "problem_hetero_rotation",
    "check_divergence",
    "flux_divergence",
    "error_metrics",
    "SOLUTION_NORMS",
    "overshoot",
    "observed_order",
)


log = logging.getLogger(__name__)


DEFAULT_EPS = 2.0 ** -10
DEFAULT_NU = 1e-4

#: Subdomain on which the boundary-layer errors are measured.
LAYER_SUBDOMAIN = (0.0, 0.8)

#: Interface lines of the heterogeneous rotation test.
HETERO_INTERFACES = (("x", 2.0 / 3.0), ("y", 2.0 / 3.0))

ERROR_GRADIENTS = ("consistent", "stabilised")

#: Comparisons behind E_c: cell values against the exact solution at the
#: centroids, or the piecewise-constant reconstruction against the exact
#: solution under subcell quadrature.
SOLUTION_NORMS = ("centroid", "quadrature")


ErrorReport = namedtuple(
    "ErrorReport",
    [
        "E_c",
        "E_g",
        "overshoot",
        "h",
        "n_cells",
        "n_faces",
        "dofs",
        "maximum",
        "minimum",
    ],
)
ErrorReport.__doc__ = """Errors and diagnostics of one discrete solution.

``E_c`` and ``E_g`` are ``None`` for problems without an exact solution and
``overshoot`` is ``None`` for problems without bounds. ``maximum`` and
``minimum`` are taken over the cell values.
"""

Overshoot = namedtuple(
    "Overshoot", ["over", "under", "over_fraction", "under_fraction"]
)


class ProblemSpec(object):
    """Stationary advection-diffusion problem.

    Args:
        name (str): Identifier.
        dim (int): 1 or 2.
        domain (tuple): ``(x0, x1)`` or ``(x0, x1, y0, y1)``.
        diffusion (DiffusionTensorField): ``Λ``.
        velocity (callable): ``V``.
        source (callable): ``f``.
        boundary (callable): ``g``.
        exact (callable, optional): Exact solution ``c``.
        exact_gradient (callable, optional): ``∇c``.
        subdomain (callable, optional): Maps cell centroids to a boolean mask
            of cells entering the error norms.
        bounds (tuple, optional): ``(lower, upper)`` bounds of the exact
            solution, used for overshoot reporting.
        interfaces (tuple, optional): Lines ``(axis, value)`` across which
            ``Λ`` jumps.
        divergence (callable, optional): Closed form of ``div V``.
        params (dict, optional): Parameters the problem was built with.
    """

    def __init__(
        self,
        name,
        dim,
        domain,
        diffusion,
        velocity,
        source,
        boundary,
        exact=None,
        exact_gradient=None,
        subdomain=None,
        bounds=None,
        interfaces=(),
        divergence=None,
        params=None,
    ):
        self.name = name
        self.dim = dim
        self.domain = tuple(domain)
        self.diffusion = diffusion
        self.velocity = velocity
        self.source = source
        self.boundary = boundary
        self.exact = exact
        self.exact_gradient = exact_gradient
        self.subdomain = subdomain
        self.bounds = bounds
        self.interfaces = tuple(interfaces)
        self.divergence = divergence
        self.params = params or {}

    def __repr__(self):  # pragma: no cover
        return "<ProblemSpec {0} dim={1} {2}>".format(self.name, self.dim, self.params)

    @property
    def has_exact(self):
        return self.exact is not None and self.exact_gradient is not None

    def subdomain_mask(self, centroids):
        """Boolean mask of cells whose centroid lies in the subdomain."""
        centroids = np.asarray(centroids, dtype=float)
        if self.subdomain is None:
            return np.ones(len(centroids), dtype=bool)
        return np.asarray(self.subdomain(centroids), dtype=bool)


def problem_eps_1d(eps=DEFAULT_EPS):
    """``c' - εc'' = 0`` on ``(0, 1)`` with ``c(0) = 1``, ``c(1) = 0``.

    >>> problem = problem_eps_1d(2.0 ** -4)
    >>> float(problem.exact(np.array([[0.0], [1.0]]))[0])
    1.0
    """
    if not eps > 0:
        raise ProblemError("eps must be > 0, got {0}".format(eps))

    scale = np.expm1(-1.0 / eps)

    def exact(p):
        return np.expm1((p[:, 0] - 1.0) / eps) / scale

    def exact_gradient(p):
        return (np.exp((p[:, 0] - 1.0) / eps) / (eps * scale))[:, None]

    return ProblemSpec(
        "eps1d",
        1,
        UNIT_INTERVAL,
        DiffusionTensorField(_constant_tensor([[eps]])),
        _constant_vector([1.0]),
        _zero,
        exact,
        exact=exact,
        exact_gradient=exact_gradient,
        bounds=(0.0, 1.0),
        divergence=_zero,
        params={"eps": eps},
    )


def problem_smooth_2d():
    """Anisotropic advection-dominated problem with ``c = sin(πx) sin(πy)``."""
    lam = np.array([[1.5e-4, 1e-6], [1e-6, 1e-8]])
    velocity = np.array([1.0, 2.0])
    pi = np.pi

    def exact(p):
        return np.sin(pi * p[:, 0]) * np.sin(pi * p[:, 1])

    def exact_gradient(p):
        sx, sy = np.sin(pi * p[:, 0]), np.sin(pi * p[:, 1])
        cx, cy = np.cos(pi * p[:, 0]), np.cos(pi * p[:, 1])
        return pi * np.stack([cx * sy, sx * cy], axis=1)

    def source(p):
        sx, sy = np.sin(pi * p[:, 0]), np.sin(pi * p[:, 1])
        cx, cy = np.cos(pi * p[:, 0]), np.cos(pi * p[:, 1])
        # Λ : Hessian of c.
        contraction = pi ** 2 * (
            -(lam[0, 0] + lam[1, 1]) * sx * sy + 2.0 * lam[0, 1] * cx * cy
        )
        return -contraction + pi * (velocity[0] * cx * sy + velocity[1] * sx * cy)

    return ProblemSpec(
        "smooth",
        2,
        UNIT_SQUARE,
        DiffusionTensorField(_constant_tensor(lam)),
        _constant_vector(velocity),
        source,
        exact,
        exact=exact,
        exact_gradient=exact_gradient,
        bounds=(0.0, 1.0),
        divergence=_zero,
    )


def problem_boundary_layer_2d(nu=DEFAULT_NU):
    """Boundary layers at ``x = 1`` and ``y = 1`` with ``V = (2, 3)``,
    ``Λ = νI``; errors are measured on ``[0, 0.8]²``.
    """
    if not nu > 0:
        raise ProblemError("nu must be > 0, got {0}".format(nu))

    def factors(p):
        x, y = p[:, 0], p[:, 1]
        ex = np.exp(2.0 * (x - 1.0) / nu)
        ey = np.exp(3.0 * (y - 1.0) / nu)
        X = (x - ex, 1.0 - 2.0 / nu * ex, -4.0 / nu ** 2 * ex)
        Y = (y ** 2 - ey, 2.0 * y - 3.0 / nu * ey, 2.0 - 9.0 / nu ** 2 * ey)
        return X, Y

    def exact(p):
        X, Y = factors(p)
        return X[0] * Y[0]

    def exact_gradient(p):
        X, Y = factors(p)
        return np.stack([X[1] * Y[0], X[0] * Y[1]], axis=1)

    def source(p):
        X, Y = factors(p)
        diffusion = -nu * (X[2] * Y[0] + X[0] * Y[2])
        return diffusion + 2.0 * X[1] * Y[0] + 3.0 * X[0] * Y[1]

    lo, hi = LAYER_SUBDOMAIN

    def subdomain(centroids):
        return np.all((centroids >= lo) & (centroids <= hi), axis=1)

    return ProblemSpec(
        "boundary-layer",
        2,
        UNIT_SQUARE,
        DiffusionTensorField(_constant_tensor(nu * np.eye(2))),
        _constant_vector([2.0, 3.0]),
        source,
        exact,
        exact=exact,
        exact_gradient=exact_gradient,
        subdomain=subdomain,
        bounds=(0.0, 1.0),
        divergence=_zero,
        params={"nu": nu},
    )


def problem_hetero_rotation():
    """Rotating flow through a strongly anisotropic, piecewise constant
    diffusion field with jumps along ``x = 2/3`` and ``y = 2/3``.
    """
    weak, strong = 1e-6, 1.0
    vertical = np.diag([weak, strong])
    horizontal = np.diag([strong, weak])
    cut = 2.0 / 3.0

    def diffusion(p):
        right = p[:, 0] > cut
        top = p[:, 1] > cut
        # Diagonal quadrants share the same tensor.
        use_vertical = right == top
        return np.where(use_vertical[:, None, None], vertical, horizontal)

    def velocity(p):
        x, y = p[:, 0], p[:, 1]
        return np.stack(
            [
                40.0 * x * (2.0 * y - 1.0) * (x - 1.0),
                -40.0 * y * (2.0 * x - 1.0) * (y - 1.0),
            ],
            axis=1,
        )

    def source(p):
        r = np.sqrt((p[:, 0] - 0.5) ** 2 + (p[:, 1] - 0.5) ** 2)
        return 1e-2 * np.exp(-((r - 0.35) ** 2) / 0.005)

    return ProblemSpec(
        "hetero",
        2,
        UNIT_SQUARE,
        DiffusionTensorField(diffusion, bounds=(weak, strong)),
        velocity,
        source,
        _zero,
        interfaces=HETERO_INTERFACES,
        divergence=_zero,
    )


#: Catalog of test problems by identifier.
PROBLEMS = {
    "eps1d": problem_eps_1d,
    "smooth": problem_smooth_2d,
    "boundary-layer": problem_boundary_layer_2d,
    "hetero": problem_hetero_rotation,
}


def make_problem(name, eps=DEFAULT_EPS, nu=DEFAULT_NU):
    """Build catalog problem `name` with its parameters."""
    if name == "eps1d":
        return problem_eps_1d(eps)
    if name == "boundary-layer":
        return problem_boundary_layer_2d(nu)
    if name in PROBLEMS:
        return PROBLEMS[name]()
    raise ProblemError(
        "Unknown problem {0!r}; expected one of {1}".format(name, tuple(PROBLEMS))
    )


def sample_points(problem, samples, seed=0, margin=0.0):
    """Uniform random points in the problem domain shrunk by `margin`."""
    rng = np.random.Generator(np.random.PCG64(seed))
    lo = np.asarray(problem.domain[0::2], dtype=float) + margin
    hi = np.asarray(problem.domain[1::2], dtype=float) - margin
    return lo + (hi - lo) * rng.random((samples, problem.dim))


def check_divergence(problem, samples=1000, seed=0, tol=1e-12, step=1e-6):
    """Sample ``div V`` and check it is non-negative.

    Uses ``problem.divergence`` when given and central differences of the
    velocity otherwise.

    Returns:
        numpy.ndarray: Sampled divergences.

    Raises:
        ProblemError: If a sample is below ``-tol``.
    """
    points = sample_points(problem, samples, seed)

    if problem.divergence is not None:
        values = evaluate_field(problem.divergence, points, "divergence")
    else:
        values = _central_divergence(
            lambda p: np.reshape(problem.velocity(p), (len(p), problem.dim)),
            points,
            step,
        )

    log.debug(
        "div V of {0!r} over {1} samples: min {2:.3e}".format(
            problem.name, len(values), float(values.min())
        )
    )

    bad = np.flatnonzero(values < -tol)
    if len(bad):
        raise ProblemError(
            "div V = {0:.3e} < 0 at {1}".format(values[bad[0]], points[bad[0]].tolist())
        )
    return values


def flux_divergence(problem, points, step=1e-5):
    """Central-difference divergence of ``-Λ∇c + cV`` from the exact solution.

    Raises:
        ProblemError: If the problem has no exact solution.
    """
    if not problem.has_exact:
        raise ProblemError("Problem {0!r} has no exact solution".format(problem.name))

    dim = problem.dim

    def flux(p):
        lam = np.reshape(problem.diffusion(p), (len(p), dim, dim))
        grad = np.reshape(problem.exact_gradient(p), (len(p), dim))
        velocity = np.reshape(problem.velocity(p), (len(p), dim))
        advective = problem.exact(p)[:, None] * velocity
        return -np.einsum("nij,nj->ni", lam, grad) + advective

    return _central_divergence(flux, np.asarray(points, dtype=float), step)


def error_metrics(
    mesh,
    geom,
    c_h,
    problem,
    scheme="hybrid2",
    gradient=None,
    error_gradient=None,
    solution_norm="centroid",
):
    """Relative errors ``E_c``, ``E_g`` and diagnostics of `c_h`.

    ``E_c = |c_K - c| / |c|`` and ``E_g = |∇_h c_h - ∇c| / (|c|² + |∇c|²)^½``.
    Numerators are restricted to the cells selected by the problem's
    subdomain; denominators are norms of the exact solution over the whole
    domain, integrated by subcell quadrature. For the ``"centroid"`` norm the
    numerators compare with ``c(x_K)`` and ``∇c(x_K)``:
    ``(sum |K| (c_K - c(x_K))²)^½`` and ``(sum |D_Kσ| |∇_Kσ - ∇c(x_K)|²)^½``.
    The ``"quadrature"`` norm integrates both differences by subcell
    quadrature and is first order for any scheme.

    Args:
        c_h (HybridField): Discrete solution.
        scheme (str): Scheme that produced `c_h`; sets the DOF count and the
            default gradient.
        gradient (numpy.ndarray, optional): Cell gradients ``(n_cells, dim)``,
            required for the cell-centered scheme.
        error_gradient (str, optional): ``"consistent"`` (default) or
            ``"stabilised"`` for hybrid schemes.
        solution_norm (str, optional): One of :data:`SOLUTION_NORMS`.

    Raises:
        ProblemError: For an unknown norm or gradient, or a cell-centered
            solution without `gradient`.
    """
    if solution_norm not in SOLUTION_NORMS:
        raise ProblemError(
            "Unknown solution norm {0!r}; expected one of {1}".format(
                solution_norm, SOLUTION_NORMS
            )
        )

    cell_centered = scheme == "cellcentered2"
    dofs = mesh.n_cells + (mesh.n_boundary_faces if cell_centered else mesh.n_faces)

    values = c_h.cell_values
    bounds_report = None
    if problem.bounds is not None:
        bounds_report = overshoot(mesh, values, *problem.bounds)

    e_c = e_g = None
    if problem.has_exact:
        points, weights = subcell_quadrature(mesh, geom)
        flat = points.reshape(-1, mesh.dim)
        cells = problem.subdomain_mask(geom.cell_centroid)
        selected = cells[geom.pair_cell]

        exact = evaluate_field(problem.exact, flat, "exact solution").reshape(
            weights.shape
        )
        exact_grad = evaluate_field(
            problem.exact_gradient, flat, "exact gradient"
        ).reshape(weights.shape + (mesh.dim,))

        pair_gradient = _pair_gradients(
            mesh, geom, c_h, cell_centered, gradient, error_gradient
        )

        c_norm = (weights * exact ** 2).sum()
        g_norm = (weights * (exact_grad ** 2).sum(axis=2)).sum()
        if solution_norm == "centroid":
            sampled = evaluate_field(
                problem.exact, geom.cell_centroid, "exact solution"
            )
            sampled_grad = evaluate_field(
                problem.exact_gradient, geom.cell_centroid, "exact gradient"
            ).reshape(mesh.n_cells, mesh.dim)
            c_err = (cells * geom.cell_measure * (values - sampled) ** 2).sum()
            hull = weights.sum(axis=1) * selected
            g_err = (
                hull * ((pair_gradient - sampled_grad[geom.pair_cell]) ** 2).sum(1)
            ).sum()
        else:
            inside = weights * selected[:, None]
            c_err = (inside * (values[geom.pair_cell][:, None] - exact) ** 2).sum()
            g_err = (
                inside * ((pair_gradient[:, None, :] - exact_grad) ** 2).sum(axis=2)
            ).sum()

        e_c = float(np.sqrt(c_err / c_norm)) if c_norm > 0 else float(np.sqrt(c_err))
        e_g = float(np.sqrt(g_err / (c_norm + g_norm)))

    return ErrorReport(
        e_c,
        e_g,
        bounds_report,
        geom.h,
        mesh.n_cells,
        mesh.n_faces,
        dofs,
        float(values.max()),
        float(values.min()),
    )


def overshoot(mesh, c_h, lower, upper):
    """Over- and undershoot of the cell values with respect to the bounds.

    Args:
        c_h (HybridField or array_like): Discrete solution or cell values.

    Returns:
        Overshoot: ``max(0, max c_K - upper)``, ``max(0, lower - min c_K)``
        and both as fractions of ``upper - lower``.

    >>> round(overshoot(None, [0.2, 1.03], 0.0, 1.0).over_fraction, 12)
    0.03
    """
    values = getattr(c_h, "cell_values", c_h)
    values = np.asarray(values, dtype=float)
    if mesh is not None and len(values) != mesh.n_cells:
        raise ProblemError(
            "Expected {0} cell values, got {1}".format(mesh.n_cells, len(values))
        )
    if not upper > lower:
        raise ProblemError("Bounds must satisfy lower < upper")

    over = max(0.0, float(values.max()) - upper)
    under = max(0.0, lower - float(values.min()))
    span = upper - lower
    return Overshoot(over, under, over / span, under / span)


def observed_order(errors, hs):
    """Pairwise convergence rates ``log(E_i/E_i+1) / log(h_i/h_i+1)``.

    Rates involving a missing, zero or negative error are ``None``.

    >>> observed_order([1e-2, 2.5e-3], [0.1, 0.05])
    [2.0]
    """
    if len(errors) != len(hs):
        raise ProblemError("errors and hs must have the same length")
    if len(errors) < 2:
        raise ProblemError("At least two levels are needed for a rate")

    rates = []
    for (e0, e1), (h0, h1) in zip(zip(errors, errors[1:]), zip(hs, hs[1:])):
        if not h0 > h1 > 0:
            raise ProblemError("Mesh sizes must be positive and strictly decreasing")
        if e0 is None or e1 is None or not (e0 > 0 and e1 > 0):
            rates.append(None)
            continue
        rates.append(float(round(np.log(e0 / e1) / np.log(h0 / h1), 12)))
    return rates


def _pair_gradients(mesh, geom, c_h, cell_centered, gradient, error_gradient):
    if cell_centered:
        if gradient is None:
            raise ProblemError("The cell-centered scheme needs its cell gradients")
        return np.asarray(gradient, dtype=float)[geom.pair_cell]

    error_gradient = error_gradient or ERROR_GRADIENTS[0]
    if error_gradient not in ERROR_GRADIENTS:
        raise ProblemError("Unknown error gradient {0!r}".format(error_gradient))

    grads = gradients(mesh, geom, c_h)
    if error_gradient == "stabilised":
        return grads.stabilised
    return grads.consistent_on_pairs


def _central_divergence(func, points, step):
    dim = points.shape[1]
    total = np.zeros(len(points))
    for i in range(dim):
        shift = np.zeros(dim)
        shift[i] = step
        total += (func(points + shift)[:, i] - func(points - shift)[:, i]) / (2 * step)
    return total


def _constant_tensor(tensor):
    tensor = np.asarray(tensor, dtype=float)

    def evaluator(p):
        return np.broadcast_to(tensor, (len(p),) + tensor.shape).copy()

    return evaluator


def _constant_vector(vector):
    vector = np.asarray(vector, dtype=float)

    def evaluator(p):
        return np.broadcast_to(vector, (len(p), len(vector))).copy()

    return evaluator


def _zero(p):
    return np.zeros(len(p))
