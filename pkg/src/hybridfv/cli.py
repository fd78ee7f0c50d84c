# -*- coding: utf-8 -*-
"""
Command-line interface.

::

    hybridfv run --problem smooth --scheme hybrid2 --levels 4
    hybridfv convergence --config configs/smooth_hybrid2_M1.cfg
    hybridfv paper-suite --out suite --max-level 4
    hybridfv mesh --mesh-family M5 --levels 2 --write kershaw.mesh

Exit codes: ``0`` success, ``1`` module errors, failed levels or failed
acceptance checks, ``2`` usage errors.
"""

import argparse
import logging
import os
import sys

from .__version__ import __version__
from .assembly import SCHEMES
from .exceptions import ConfigError, HybridFVError
from .hybrid_space import HybridField
from .mesh import compute_geometry, read_mesh, regularity, write_mesh
from .output import (
    format_rates,
    format_summary,
    write_study_csv,
    write_summary,
    write_vtk,
)
from .problems import PROBLEMS
from .study import (
    MESH_SOURCES,
    SOLVERS,
    StudyConfig,
    paper_suite,
    run_level,
    run_study,
)


__all__ = ("main", "build_parser", "load_config", "cmd_run", "cmd_convergence")


log = logging.getLogger(__name__)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hybridfv",
        description="Hybrid finite volume solver for advection-diffusion problems.",
    )
    parser.add_argument(
        "--version", action="version", version="%(prog)s {0}".format(__version__)
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="More logging (repeatable)."
    )
    parser.add_argument("-q", "--quiet", action="store_true", help="Only errors.")

    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    run = commands.add_parser("run", help="Solve a single refinement level.")
    _add_study_arguments(run)
    run.set_defaults(handler=cmd_run)

    convergence = commands.add_parser(
        "convergence", help="Run a convergence study over refinement levels."
    )
    _add_study_arguments(convergence)
    convergence.set_defaults(handler=cmd_convergence)

    suite = commands.add_parser(
        "paper-suite", help="Run the benchmark suite with acceptance checks."
    )
    suite.add_argument("--out", default="suite", help="Output directory.")
    suite.add_argument(
        "--max-level", type=int, default=6, help="Finest refinement level."
    )
    suite.add_argument("--seed", type=int, default=0, help="Perturbation seed.")
    suite.set_defaults(handler=cmd_paper_suite)

    mesh = commands.add_parser("mesh", help="Generate or inspect a mesh.")
    mesh.add_argument("--config", help="Config file.")
    mesh.add_argument("--mesh-family", choices=MESH_SOURCES)
    mesh.add_argument("--levels", help="Refinement level.")
    mesh.add_argument("--seed", type=int)
    mesh.add_argument("--input", help="Read and inspect this mesh file.")
    mesh.add_argument("--write", help="Write the mesh in text format.")
    mesh.add_argument("--vtk", help="Write the mesh as VTK.")
    mesh.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE", help="Override."
    )
    mesh.set_defaults(handler=cmd_mesh)

    return parser


def _add_study_arguments(parser):
    parser.add_argument("--config", help="Config file (key = value lines).")
    parser.add_argument("--problem", choices=tuple(PROBLEMS))
    parser.add_argument("--scheme", choices=SCHEMES + ("hybrid2+limiter",))
    parser.add_argument("--mesh-family", choices=MESH_SOURCES)
    parser.add_argument("--mesh-file", help="Mesh for --mesh-family file.")
    parser.add_argument("--levels", help="Levels, e.g. 1-6 or 2,4.")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--eps", type=float, help="eps of the 1D problem.")
    parser.add_argument("--nu", type=float, help="nu of the boundary-layer problem.")
    parser.add_argument(
        "--vanishing-diffusion",
        action="store_true",
        default=None,
        help="Add |V| h^1.5 to the diffusion tensor.",
    )
    parser.add_argument("--align", action="store_true", default=None)
    parser.add_argument("--out", help="Output directory.")
    parser.add_argument("--solver", choices=SOLVERS)
    parser.add_argument("--tol", type=float, help="Relative residual tolerance.")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override any config field (repeatable).",
    )


#: Command-line flags that map to config fields.
_OVERRIDES = (
    "problem",
    "scheme",
    "mesh_family",
    "mesh_file",
    "levels",
    "seed",
    "eps",
    "nu",
    "vanishing_diffusion",
    "align",
    "out",
    "solver",
    "tol",
)


def load_config(args):
    """Build the study config: defaults, then ``--config``, then flags and
    ``--set`` overrides.
    """
    config = StudyConfig.from_file(args.config) if args.config else StudyConfig()

    overrides = {}
    for name in _OVERRIDES:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value

    for item in getattr(args, "set", ()):
        if "=" not in item:
            raise ConfigError("--set expects KEY=VALUE, got {0!r}".format(item))
        key, value = (part.strip() for part in item.split("=", 1))
        overrides[key] = value

    return config.update(**overrides)


def cmd_run(args):
    """Solve the finest configured level and write VTK and summary files."""
    config = load_config(args)
    level = config.levels[-1]
    if len(config.levels) > 1:
        log.info("run solves a single level; using level {0}".format(level))

    _ensure_dir(config.out)
    result = run_level(config, level)
    row = result.row
    if result.solution is None:
        raise HybridFVError("Level {0} failed with {1}".format(level, row.error))

    stem = os.path.join(config.out, "{0}_L{1}".format(config.label, level))
    write_vtk(
        stem + ".vtk", result.mesh, result.solution.field, result.solution.gradient
    )

    items = [
        ("problem", config.problem),
        ("scheme", config.scheme),
        ("mesh_family", config.mesh_family),
        ("level", row.level),
        ("h", row.h),
        ("n_cells", row.n_cells),
        ("n_faces", row.n_faces),
        ("dofs", row.dofs),
        ("E_c", row.E_c),
        ("E_g", row.E_g),
        ("overshoot", row.overshoot),
        ("maximum", row.maximum),
        ("minimum", row.minimum),
        ("residual", row.residual),
        ("picard_iterations", row.picard_iterations),
        ("seconds", row.seconds),
    ]
    write_summary(stem + ".txt", items)
    print(format_summary(items))
    return 0


def cmd_convergence(args):
    """Run a study and write its CSV; fails if any level failed."""
    config = load_config(args)
    _ensure_dir(config.out)

    result = run_study(config)
    path = os.path.join(config.out, "{0}.csv".format(config.label))
    write_study_csv(path, result.rows)

    print(format_rates(result.rows))
    print("wrote {0}".format(path))

    if result.failed:
        print(
            "{0} of {1} levels failed".format(len(result.failed), len(result)),
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_paper_suite(args):
    """Run the benchmark suite; fails if any acceptance check failed."""
    result = paper_suite(args.out, max_level=args.max_level, seed=args.seed)

    for check in result.checks:
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[check.passed]
        print("{0}  {1}".format(status, check.name))

    failed = [check for check in result.checks if check.passed is False]
    print(
        "{0} checks, {1} failed; report in {2}".format(
            len(result.checks), len(failed), os.path.join(args.out, "acceptance.json")
        )
    )
    return 1 if failed else 0


def cmd_mesh(args):
    """Build or read a mesh, print its statistics and optionally write it."""
    if args.input:
        mesh = read_mesh(args.input)
    else:
        config = load_config(args)
        mesh = config.build_mesh(config.levels[-1])

    geom = compute_geometry(mesh)
    report = regularity(mesh, geom)
    print(
        format_summary(
            [
                ("dim", mesh.dim),
                ("n_vertices", mesh.n_vertices),
                ("n_cells", mesh.n_cells),
                ("n_faces", mesh.n_faces),
                ("n_boundary_faces", mesh.n_boundary_faces),
                ("h", geom.h),
                ("regularity", report.regul),
            ]
        )
    )

    if args.write:
        write_mesh(mesh, args.write)
    if args.vtk:
        write_vtk(args.vtk, mesh, HybridField.zeros(mesh))
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.WARNING
    if args.quiet:
        level = logging.ERROR
    elif args.verbose == 1:
        level = logging.INFO
    elif args.verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )

    try:
        return args.handler(args)
    except HybridFVError as ex:
        print("hybridfv: error: {0}".format(ex), file=sys.stderr)
        return 1


def _ensure_dir(path):
    if path and not os.path.isdir(path):
        os.makedirs(path)
