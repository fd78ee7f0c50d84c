# -*- coding: utf-8 -*-
"""
Convergence studies.

A :class:`StudyConfig` names a problem, a scheme, a mesh family and the
refinement levels to run. :func:`run_study` solves every level, measures the
errors and computes observed orders between consecutive levels;
:func:`paper_suite` runs the full set of benchmark studies and checks the
results against reference values.
"""

from collections import OrderedDict, namedtuple
import logging
import os
import time

import numpy as np

from . import output
from .assembly import SCHEMES, SOURCES, SchemeOptions, solve_problem
from .exceptions import ConfigError, HybridFVError
from .fluxes import BOUNDARY_TREATMENTS, CORRECTION_GRADIENTS
from .hybrid_space import FACE_RULES
from .mesh import (
    FAMILIES,
    KERSHAW_DISTORTION,
    DEFAULT_PERTURBATION,
    build_family,
    compute_geometry,
    read_mesh,
)
from .problems import (
    DEFAULT_EPS,
    DEFAULT_NU,
    ERROR_GRADIENTS,
    PROBLEMS,
    SOLUTION_NORMS,
    error_metrics,
    make_problem,
    observed_order,
)
from .utils import format_levels, parse_levels


__all__ = (
    "StudyConfig",
    "StudyRow",
    "StudyResult",
    "LevelResult",
    "Check",
    "SuiteResult",
    "run_level",
    "run_study",
    "paper_suite",
)


log = logging.getLogger(__name__)


MESH_SOURCES = FAMILIES + ("file",)
SOLVERS = ("direct", "iterative")
FAMILIES_2D = ("M1", "M2", "M3", "M4", "M5")


def _parse_bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError("Not a boolean: {0!r}".format(value))


def _optional(parse):
    def parser(value):
        if value is None or (isinstance(value, str) and value.lower() == "none"):
            return None
        return parse(value)

    return parser


def _format(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return format_levels(value)
    return str(value)


#: ``(name, parser, default, help)`` of every configuration field.
FIELDS = (
    ("problem", str, "smooth", "Test problem: {0}.".format(", ".join(PROBLEMS))),
    ("eps", float, DEFAULT_EPS, "Diffusion of the 1D eps problem."),
    ("nu", float, DEFAULT_NU, "Diffusion of the boundary-layer problem."),
    ("scheme", str, "hybrid2", "Scheme: {0}.".format(", ".join(SCHEMES))),
    ("mesh_family", str, "M1", "Mesh family: {0}.".format(", ".join(MESH_SOURCES))),
    ("levels", parse_levels, [1, 2, 3, 4], "Refinement levels, e.g. 1-6 or 2,4."),
    ("cells_1d", int, 100, "Cells of the coarsest 1D mesh."),
    ("mesh_file", _optional(str), None, "Mesh file for mesh_family = file."),
    ("align", _parse_bool, False, "Snap meshes to the problem's interfaces."),
    ("distortion", float, KERSHAW_DISTORTION, "Kershaw distortion amplitude."),
    ("perturbation", float, DEFAULT_PERTURBATION, "Random vertex displacement."),
    ("seed", int, 0, "Seed of the vertex perturbation."),
    ("vanishing_diffusion", _parse_bool, False, "Add |V| h^1.5 to the diffusion."),
    ("quadrature", str, "midpoint", "Face rule: {0}.".format(", ".join(FACE_RULES))),
    (
        "correction_gradient",
        str,
        "consistent",
        "Second-order correction gradient: {0}.".format(
            ", ".join(CORRECTION_GRADIENTS)
        ),
    ),
    ("source", str, "centroid", "Source sampling: {0}.".format(", ".join(SOURCES))),
    (
        "cc_boundary",
        str,
        "mirror",
        "Cell-centered boundary treatment: {0}.".format(
            ", ".join(BOUNDARY_TREATMENTS)
        ),
    ),
    (
        "error_gradient",
        str,
        "consistent",
        "Gradient in E_g for hybrid schemes: {0}.".format(", ".join(ERROR_GRADIENTS)),
    ),
    (
        "solution_norm",
        str,
        "centroid",
        "Comparison behind E_c: {0}.".format(", ".join(SOLUTION_NORMS)),
    ),
    ("solver", str, "direct", "Linear solver: direct or iterative."),
    ("tol", _optional(float), None, "Relative residual tolerance."),
    ("maxiter", int, 1000, "Krylov iteration cap."),
    ("picard_tol", float, 1e-10, "Picard stopping distance (limited scheme)."),
    ("picard_maxiter", int, 100, "Picard iteration cap (limited scheme)."),
    ("relaxation", float, 1.0, "Picard relaxation factor."),
    ("force_phi", _optional(float), None, "Freeze the limiter to this value."),
    ("out", str, "results", "Output directory."),
    ("dump_matrix", _parse_bool, False, "Write Matrix Market dumps per level."),
)

FIELD_NAMES = tuple(field[0] for field in FIELDS)
_PARSERS = dict((field[0], field[1]) for field in FIELDS)


StudyRow = namedtuple(
    "StudyRow",
    [
        "level",
        "h",
        "n_cells",
        "n_faces",
        "dofs",
        "E_c",
        "E_g",
        "order_c",
        "order_g",
        "overshoot",
        "residual",
        "seconds",
        "maximum",
        "minimum",
        "picard_iterations",
        "error",
    ],
)
StudyRow.__doc__ = """One refinement level of a study.

``overshoot`` is the larger of the over- and undershoot fractions; ``error``
is the code of the exception that failed the level, else ``None``.
"""

LevelResult = namedtuple("LevelResult", ["row", "solution", "mesh", "geom"])

Check = namedtuple("Check", ["name", "value", "expected", "passed", "detail"])
Check.__doc__ = """Acceptance check; ``passed`` is ``None`` when skipped."""

SuiteResult = namedtuple("SuiteResult", ["checks", "files"])


class StudyConfig(object):
    """Study configuration.

    Fields and defaults are listed in :data:`FIELDS`. Values given as strings
    are parsed with the field's parser, so command-line overrides and config
    files share one code path.

    The text format is one ``key = value`` per line; ``#`` starts a comment.

    >>> config = StudyConfig(scheme="upwind1", levels="3-4")
    >>> StudyConfig.from_text(config.to_text()) == config
    True
    """

    def __init__(self, **values):
        for name, _, default, _ in FIELDS:
            setattr(self, name, list(default) if isinstance(default, list) else default)
        self.update(**values)

    def __repr__(self):  # pragma: no cover
        return "StudyConfig({0})".format(
            ", ".join("{0}={1!r}".format(k, v) for k, v in self.as_dict().items())
        )

    def __eq__(self, other):
        return isinstance(other, StudyConfig) and self.as_dict() == other.as_dict()

    def __ne__(self, other):
        return not self == other

    def update(self, **values):
        """Set fields from typed values or strings.

        Raises:
            ConfigError: For unknown keys, unparsable values or invalid
                combinations.
        """
        for key, value in values.items():
            if key not in _PARSERS:
                raise ConfigError("Unknown configuration key {0!r}".format(key))
            try:
                setattr(self, key, _PARSERS[key](value))
            except (TypeError, ValueError) as ex:
                raise ConfigError("Invalid value for {0}: {1}".format(key, ex))

        self.validate()
        return self

    def validate(self):
        choices = (
            ("problem", tuple(PROBLEMS)),
            ("scheme", SCHEMES + ("hybrid2+limiter",)),
            ("mesh_family", MESH_SOURCES),
            ("quadrature", FACE_RULES),
            ("correction_gradient", CORRECTION_GRADIENTS),
            ("source", SOURCES),
            ("cc_boundary", BOUNDARY_TREATMENTS),
            ("error_gradient", ERROR_GRADIENTS),
            ("solution_norm", SOLUTION_NORMS),
            ("solver", SOLVERS),
        )
        for name, allowed in choices:
            if getattr(self, name) not in allowed:
                raise ConfigError(
                    "Invalid {0} {1!r}; expected one of {2}".format(
                        name, getattr(self, name), ", ".join(allowed)
                    )
                )

        if self.scheme == "hybrid2" and self.correction_gradient == "stabilised":
            raise ConfigError(
                "correction_gradient = stabilised needs the limited scheme"
            )
        if not self.levels or min(self.levels) < 1:
            raise ConfigError("Levels must be >= 1, got {0}".format(self.levels))
        if self.mesh_family == "file" and not self.mesh_file:
            raise ConfigError("mesh_family = file needs mesh_file")
        if not self.eps > 0 or not self.nu > 0:
            raise ConfigError("eps and nu must be > 0")
        if not 0.0 < self.relaxation <= 1.0:
            raise ConfigError("relaxation must be in (0, 1]")

    def as_dict(self):
        return OrderedDict((name, getattr(self, name)) for name in FIELD_NAMES)

    def copy(self, **values):
        config = StudyConfig(**self.as_dict())
        return config.update(**values)

    def to_text(self):
        lines = ["# hybridfv study configuration"]
        lines.extend(
            "{0} = {1}".format(name, _format(value))
            for name, value in self.as_dict().items()
        )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, source="<string>"):
        values = OrderedDict()
        for number, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(
                    "{0}:{1}: expected 'key = value', got {2!r}".format(
                        source, number, line
                    )
                )
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
        return cls(**values)

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fp:
                text = fp.read()
        except (IOError, OSError) as ex:
            raise ConfigError("Cannot read config {0}: {1}".format(path, ex))
        return cls.from_text(text, source=path)

    def write(self, path):
        with open(path, "w") as fp:
            fp.write(self.to_text())
        return path

    def scheme_options(self):
        return SchemeOptions(
            quadrature=self.quadrature,
            vanishing_diffusion=self.vanishing_diffusion,
            correction_gradient=self.correction_gradient,
            source=self.source,
            cc_boundary=self.cc_boundary,
            solver=self.solver,
            tol=self.tol,
            maxiter=self.maxiter,
            picard_tol=self.picard_tol,
            picard_maxiter=self.picard_maxiter,
            relaxation=self.relaxation,
            force_phi=self.force_phi,
        )

    def build_problem(self):
        return make_problem(self.problem, eps=self.eps, nu=self.nu)

    def build_mesh(self, level, problem=None):
        """Mesh of refinement `level`, snapped to the problem interfaces when
        ``align`` is set.
        """
        interfaces = ()
        if self.align:
            interfaces = (problem or self.build_problem()).interfaces

        if self.mesh_family == "file":
            return read_mesh(self.mesh_file, interfaces=interfaces)

        return build_family(
            self.mesh_family,
            level,
            seed=self.seed,
            interfaces=interfaces,
            cells_1d=self.cells_1d,
            perturbation=self.perturbation,
            distortion=self.distortion,
        )

    @property
    def label(self):
        """File stem naming problem, scheme and mesh family."""
        parts = [self.problem, self.scheme.replace("+", "-"), self.mesh_family]
        if self.vanishing_diffusion:
            parts.append("vd")
        return "_".join(parts)


class StudyResult(object):
    """Rows of a study in level order."""

    def __init__(self, config, rows):
        self.config = config
        self.rows = rows

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def failed(self):
        return [row for row in self.rows if row.error is not None]

    def column(self, name):
        return [getattr(row, name) for row in self.rows]

    def row(self, level):
        for row in self.rows:
            if row.level == level:
                return row
        return None

    def last_order(self, name="order_c"):
        """Observed order between the last two levels, or ``None``."""
        return self.rows[-1]._asdict()[name] if len(self.rows) > 1 else None


def run_level(config, level, problem=None):
    """Solve one refinement level.

    Module errors are caught, logged and recorded in the row's ``error``.

    Returns:
        LevelResult
    """
    problem = problem or config.build_problem()
    start = time.perf_counter()
    mesh = geom = solution = None

    try:
        mesh = config.build_mesh(level, problem)
        geom = compute_geometry(mesh)
        solution = solve_problem(
            mesh, problem, config.scheme, config.scheme_options(), geom=geom
        )
        errors = error_metrics(
            mesh,
            geom,
            solution.field,
            problem,
            config.scheme,
            gradient=solution.gradient,
            error_gradient=config.error_gradient,
            solution_norm=config.solution_norm,
        )
    except HybridFVError as ex:
        log.warning("Level {0} of {1} failed: {2}".format(level, config.label, ex))
        row = StudyRow(
            level,
            geom.h if geom is not None else None,
            mesh.n_cells if mesh is not None else None,
            mesh.n_faces if mesh is not None else None,
            None,
            None,
            None,
            None,
            None,
            None,
            None,
            time.perf_counter() - start,
            None,
            None,
            None,
            ex.code,
        )
        return LevelResult(row, None, mesh, geom)

    if config.dump_matrix and solution.system is not None:
        _ensure_dir(config.out)
        solution.system.dump(
            os.path.join(config.out, "{0}_L{1}".format(config.label, level))
        )

    bounds = errors.overshoot
    row = StudyRow(
        level,
        errors.h,
        errors.n_cells,
        errors.n_faces,
        errors.dofs,
        errors.E_c,
        errors.E_g,
        None,
        None,
        None if bounds is None else max(bounds.over_fraction, bounds.under_fraction),
        solution.report.residual,
        time.perf_counter() - start,
        errors.maximum,
        errors.minimum,
        solution.report.picard_iterations,
        None,
    )
    return LevelResult(row, solution, mesh, geom)


def run_study(config, problem=None):
    """Run every level of `config` and compute observed orders.

    Returns:
        StudyResult
    """
    problem = problem or config.build_problem()
    rows = []

    for level in config.levels:
        result = run_level(config, level, problem)
        row = result.row

        if rows:
            row = row._replace(
                order_c=_order(rows[-1], row, "E_c"),
                order_g=_order(rows[-1], row, "E_g"),
            )
        rows.append(row)

        log.info(
            "{0} level {1}: h={2} E_c={3} E_g={4} ({5:.2f}s)".format(
                config.label, level, row.h, row.E_c, row.E_g, row.seconds
            )
        )

    return StudyResult(config, rows)


def paper_suite(out, max_level=6, seed=0):
    """Run the benchmark studies and check them against reference values.

    Writes one CSV per study, 1D solution profiles, the mesh-size table and
    ``acceptance.json`` to `out`. Checks that need levels above `max_level`
    are reported as skipped.

    Returns:
        SuiteResult
    """
    _ensure_dir(out)
    suite = _Suite(out, max_level, seed)
    suite.eps_sensitivity()
    suite.dof_table()
    suite.smooth()
    suite.boundary_layer()
    suite.heterogeneous()

    report = os.path.join(out, "acceptance.json")
    output.write_report(report, suite.checks)
    suite.files.append(report)

    failed = [check for check in suite.checks if check.passed is False]
    log.info(
        "Acceptance: {0} checks, {1} failed, {2} skipped".format(
            len(suite.checks),
            len(failed),
            len([check for check in suite.checks if check.passed is None]),
        )
    )
    return SuiteResult(suite.checks, suite.files)


#: Reference values of the benchmark studies, by refinement level.
SMOOTH_HYBRID2_M1 = {
    1: 5.192e-02,
    2: 1.287e-02,
    3: 3.208e-03,
    4: 7.997e-04,
    5: 1.989e-04,
    6: 4.934e-05,
}
SMOOTH_UPWIND1_M1 = {3: 1.592e-01, 4: 8.402e-02, 5: 4.318e-02, 6: 2.178e-02}
SMOOTH_UPWIND1_M1_GRADIENT = {3: 2.586e-01, 4: 1.676e-01, 5: 1.111e-01, 6: 7.535e-02}
SMOOTH_CELL_CENTERED_M1 = {6: 5.903e-04}
SMOOTH_HYBRID2_M1_GRADIENT = {3: 7.340e-05}
LAYER_HYBRID2_M1 = {3: 8.734e-04, 4: 2.174e-04, 5: 5.184e-05, 6: 1.274e-05}

#: Mesh size and counts of the Cartesian family: (h, n_cells, n_faces,
#: hybrid DOFs, cell-centered DOFs).
DOF_TABLE = {
    1: (3.535e-01, 16, 40, 56, 32),
    2: (1.767e-01, 64, 144, 208, 96),
    3: (8.838e-02, 256, 544, 800, 320),
    4: (4.419e-02, 1024, 2112, 3136, 1152),
    5: (2.209e-02, 4096, 8320, 12416, 4352),
    6: (1.104e-02, 16384, 33024, 49408, 16896),
}

HETERO_MAXIMUM = (6.2e-4, 8.4e-4)
EPS_EXPONENTS = (4, 6, 8, 10)


class _Suite(object):
    def __init__(self, out, max_level, seed):
        self.out = out
        self.max_level = max_level
        self.seed = seed
        self.checks = []
        self.files = []

    def config(self, **values):
        values.setdefault("seed", self.seed)
        values.setdefault("out", self.out)
        return StudyConfig(**values)

    def study(self, **values):
        config = self.config(**values)
        result = run_study(config)
        path = os.path.join(self.out, "{0}.csv".format(config.label))
        output.write_study_csv(path, result.rows)
        self.files.append(path)
        return result

    def levels(self, first=1):
        return list(range(first, self.max_level + 1))

    def add(self, name, value, expected, passed, detail=""):
        self.checks.append(Check(name, value, expected, bool(passed), detail))

    def skip(self, name, expected, level):
        self.checks.append(
            Check(name, None, expected, None, "skipped: needs level {0}".format(level))
        )

    def within(self, name, value, target, rel, level=None):
        expected = "{0:.4g} +/- {1:.0f}%".format(target, 100 * rel)
        if level is not None and level > self.max_level:
            return self.skip(name, expected, level)
        passed = value is not None and abs(value - target) <= rel * abs(target)
        self.add(name, value, expected, passed)

    def between(self, name, value, lower, upper, level=None):
        expected = "[{0}, {1}]".format(
            "-inf" if lower is None else lower, "inf" if upper is None else upper
        )
        if level is not None and level > self.max_level:
            return self.skip(name, expected, level)
        passed = (
            value is not None
            and (lower is None or value >= lower)
            and (upper is None or value <= upper)
        )
        self.add(name, value, expected, passed)

    def eps_sensitivity(self):
        variants = (
            ("upwind1", "upwind1", False),
            ("cellcentered2", "cellcentered2", False),
            ("hybrid2", "hybrid2", False),
            ("hybrid2-vd", "hybrid2", True),
        )
        overshoots = {}
        rows = []

        for k in EPS_EXPONENTS:
            eps = 2.0 ** -k
            columns = OrderedDict()
            x = exact = None

            for label, scheme, vd in variants:
                config = self.config(
                    problem="eps1d",
                    eps=eps,
                    scheme=scheme,
                    mesh_family="I1",
                    levels=[1],
                    vanishing_diffusion=vd,
                )
                result = run_level(config, 1)
                overshoots[(k, label)] = result.row
                rows.append(
                    [
                        "2^-{0}".format(k),
                        label,
                        result.row.maximum,
                        result.row.minimum,
                        result.row.overshoot,
                        result.row.error,
                    ]
                )
                if result.solution is None:
                    continue

                if x is None:
                    x = result.geom.cell_centroid[:, 0]
                    exact = config.build_problem().exact(result.geom.cell_centroid)
                columns[label] = result.solution.field.cell_values

            if x is not None:
                path = os.path.join(self.out, "eps1d_profile_2-{0}.csv".format(k))
                output.write_profiles_csv(path, x, exact, columns)
                self.files.append(path)

        path = os.path.join(self.out, "eps1d_overshoot.csv")
        output.write_table_csv(
            path, ["eps", "variant", "maximum", "minimum", "overshoot", "error"], rows
        )
        self.files.append(path)

        upwind = [overshoots[(k, "upwind1")].overshoot for k in EPS_EXPONENTS]
        self.between(
            "eps1d upwind1 overshoot (all eps)",
            None if None in upwind else max(upwind),
            None,
            1e-10,
        )
        self.between(
            "eps1d hybrid2 overshoot eps=2^-10",
            overshoots[(10, "hybrid2")].overshoot,
            1e-12,
            None,
        )
        self.between(
            "eps1d hybrid2 vanishing diffusion overshoot eps=2^-10",
            overshoots[(10, "hybrid2-vd")].overshoot,
            None,
            0.05,
        )

    def dof_table(self):
        rows = []
        for level in self.levels():
            mesh = build_family("M1", level)
            geom = compute_geometry(mesh)
            actual = (
                geom.h,
                mesh.n_cells,
                mesh.n_faces,
                mesh.n_cells + mesh.n_faces,
                mesh.n_cells + mesh.n_boundary_faces,
            )
            rows.append([level] + list(actual))

            if level in DOF_TABLE:
                expected = DOF_TABLE[level]
                passed = actual[1:] == expected[1:] and np.isclose(
                    actual[0], expected[0], rtol=1e-3
                )
                self.add(
                    "dofs M1 level {0}".format(level),
                    list(actual),
                    list(expected),
                    passed,
                )

        path = os.path.join(self.out, "dofs_M1.csv")
        output.write_table_csv(
            path, ["level", "h", "n_cells", "n_faces", "dofs_hybrid", "dofs_cc"], rows
        )
        self.files.append(path)

    def smooth(self):
        results = {}
        for scheme in ("hybrid2", "upwind1", "cellcentered2"):
            for family in FAMILIES_2D:
                results[(scheme, family)] = self.study(
                    problem="smooth",
                    scheme=scheme,
                    mesh_family=family,
                    levels=self.levels(),
                )

        hybrid = results[("hybrid2", "M1")]
        for level, target in sorted(SMOOTH_HYBRID2_M1.items()):
            self.within(
                "smooth hybrid2 M1 E_c level {0}".format(level),
                _value(hybrid, level, "E_c"),
                target,
                0.15,
                level,
            )
        self.between(
            "smooth hybrid2 M1 order", hybrid.last_order(), 1.9, None, level=2
        )
        for level, target in sorted(SMOOTH_HYBRID2_M1_GRADIENT.items()):
            self.within(
                "smooth hybrid2 M1 E_g level {0}".format(level),
                _value(hybrid, level, "E_g"),
                target,
                0.30,
                level,
            )

        upwind = results[("upwind1", "M1")]
        self.within(
            "smooth upwind1 M1 E_c level 6",
            _value(upwind, 6, "E_c"),
            SMOOTH_UPWIND1_M1[6],
            0.15,
            6,
        )
        self.between(
            "smooth upwind1 M1 order", upwind.last_order(), 0.85, 1.15, level=2
        )
        for level, target in sorted(SMOOTH_UPWIND1_M1_GRADIENT.items()):
            self.within(
                "smooth upwind1 M1 E_g level {0}".format(level),
                _value(upwind, level, "E_g"),
                target,
                0.30,
                level,
            )

        cc = results[("cellcentered2", "M1")]
        self.within(
            "smooth cellcentered2 M1 E_c level 6",
            _value(cc, 6, "E_c"),
            SMOOTH_CELL_CENTERED_M1[6],
            0.20,
            6,
        )
        self.between("smooth cellcentered2 M1 order", cc.last_order(), 1.8, None, 2)

        for family in ("M3", "M4", "M5"):
            self.between(
                "smooth hybrid2 {0} E_g order".format(family),
                results[("hybrid2", family)].last_order("order_g"),
                0.9,
                None,
                2,
            )
        for family in ("M3", "M4"):
            self.between(
                "smooth hybrid2 {0} order".format(family),
                results[("hybrid2", family)].last_order(),
                1.8,
                None,
                2,
            )
            self.between(
                "smooth upwind1 {0} order".format(family),
                results[("upwind1", family)].last_order(),
                0.8,
                1.2,
                2,
            )
            self.between(
                "smooth cellcentered2 {0} order".format(family),
                results[("cellcentered2", family)].last_order(),
                None,
                1.3,
                2,
            )

    def boundary_layer(self):
        results = {}
        for family in FAMILIES_2D:
            results[family] = self.study(
                problem="boundary-layer",
                scheme="hybrid2",
                mesh_family=family,
                levels=self.levels(first=min(3, self.max_level)),
            )

        layer = results["M1"]
        for level, target in sorted(LAYER_HYBRID2_M1.items()):
            self.within(
                "boundary-layer hybrid2 M1 E_c level {0}".format(level),
                _value(layer, level, "E_c"),
                target,
                0.15,
                level,
            )
        self.between(
            "boundary-layer hybrid2 M1 order", layer.last_order(), 1.85, 2.15, level=4
        )

    def heterogeneous(self):
        level = min(4, self.max_level)
        rows = []
        maxima = {}

        for family in ("M1", "M3"):
            for vd in (False, True):
                config = self.config(
                    problem="hetero",
                    scheme="hybrid2",
                    mesh_family=family,
                    levels=[level],
                    align=True,
                    vanishing_diffusion=vd,
                )
                result = run_level(config, level)
                maxima[(family, vd)] = result.row.maximum
                rows.append(
                    [
                        family,
                        vd,
                        level,
                        result.row.n_cells,
                        result.row.maximum,
                        result.row.minimum,
                        result.row.error,
                    ]
                )
                if result.solution is not None:
                    path = os.path.join(
                        self.out, "{0}_L{1}.vtk".format(config.label, level)
                    )
                    output.write_vtk(
                        path,
                        result.mesh,
                        result.solution.field,
                        result.solution.gradient,
                    )
                    self.files.append(path)

        path = os.path.join(self.out, "hetero.csv")
        output.write_table_csv(
            path,
            [
                "mesh_family",
                "vanishing_diffusion",
                "level",
                "n_cells",
                "maximum",
                "minimum",
                "error",
            ],
            rows,
        )
        self.files.append(path)

        lower, upper = HETERO_MAXIMUM
        self.between(
            "hetero hybrid2 M1 maximum", maxima[("M1", False)], lower, upper, 4
        )


def _order(previous, row, name):
    e0, e1 = getattr(previous, name), getattr(row, name)
    if None in (e0, e1, previous.h, row.h) or not previous.h > row.h:
        return None
    return observed_order([e0, e1], [previous.h, row.h])[0]


def _value(result, level, name):
    row = result.row(level)
    return None if row is None else getattr(row, name)


def _ensure_dir(path):
    if path and not os.path.isdir(path):
        os.makedirs(path)
