# -*- coding: utf-8 -*-
"""
Result files.

Tables are CSV with fixed number formatting so reruns produce identical
bytes; solution fields are legacy ASCII VTK unstructured grids written with
:mod:`meshio`. Every file is written to a temporary name next to its target
and moved into place.
"""

import csv
import io
import logging
import os
import tempfile

import meshio
import numpy as np

from .utils import json_dumps


__all__ = (
    "CSV_COLUMNS",
    "format_rates",
    "format_summary",
    "write_study_csv",
    "write_table_csv",
    "write_profiles_csv",
    "write_summary",
    "write_vtk",
    "write_report",
)


log = logging.getLogger(__name__)


#: Column order of study tables.
CSV_COLUMNS = (
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
)

_FORMATS = {
    "level": "{0:d}",
    "n_cells": "{0:d}",
    "n_faces": "{0:d}",
    "dofs": "{0:d}",
    "order_c": "{0:.4f}",
    "order_g": "{0:.4f}",
    "seconds": "{0:.3f}",
}

# VTK cell type by vertex count; larger cells are polygons.
_CELL_TYPES = {2: "line", 3: "triangle", 4: "quad"}


def format_value(value, fmt="{0:.6e}"):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt.format(float(value))
    return str(value)


def write_study_csv(path, rows):
    """Write study rows with the :data:`CSV_COLUMNS` header."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                format_value(getattr(row, column), _FORMATS.get(column, "{0:.6e}"))
                for column in CSV_COLUMNS
            ]
        )
    return _atomic_write(path, buffer.getvalue())


def write_table_csv(path, header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])
    return _atomic_write(path, buffer.getvalue())


def write_profiles_csv(path, x, exact, columns):
    """Write 1D profiles: ``x``, ``exact`` and one column per entry of the
    ordered mapping `columns`.
    """
    header = ["x", "exact"] + list(columns)
    data = np.column_stack([x, exact] + [np.asarray(v) for v in columns.values()])
    return write_table_csv(path, header, data.tolist())


def format_rates(rows):
    """Plain-text table of errors and observed orders."""
    header = "{0:>5}  {1:>10}  {2:>10}  {3:>7}  {4:>10}  {5:>7}".format(
        "level", "h", "E_c", "order", "E_g", "order"
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            "{0:>5}  {1:>10}  {2:>10}  {3:>7}  {4:>10}  {5:>7}".format(
                row.level,
                format_value(row.h, "{0:.3e}"),
                format_value(row.E_c, "{0:.3e}") or (row.error or "-"),
                format_value(row.order_c, "{0:.2f}") or "-",
                format_value(row.E_g, "{0:.3e}") or "-",
                format_value(row.order_g, "{0:.2f}") or "-",
            )
        )
    return "\n".join(lines)


def format_summary(items):
    """Render ``(key, value)`` pairs as aligned ``key: value`` lines."""
    items = list(items)
    width = max(len(key) for key, _ in items)
    return "\n".join(
        "{0}: {1}".format(key.ljust(width), format_value(value, "{0:.6e}") or "-")
        for key, value in items
    )


def write_summary(path, items):
    return _atomic_write(path, format_summary(items) + "\n")


def write_vtk(path, mesh, field, gradient=None):
    """Write cell data ``c`` (and ``grad_c`` padded to 3 components) on
    `mesh` as a legacy ASCII VTK file.
    """
    points = np.zeros((mesh.n_vertices, 3))
    points[:, : mesh.dim] = mesh.vertices

    blocks, order = [], []
    for k, cell in enumerate(mesh.cells):
        kind = _CELL_TYPES.get(len(cell), "polygon")
        if blocks and blocks[-1][0] == kind and len(blocks[-1][1][0]) == len(cell):
            blocks[-1][1].append(cell)
            order[-1].append(k)
        else:
            blocks.append((kind, [cell]))
            order.append([k])

    cell_data = {"c": [field.cell_values[ids] for ids in order]}
    if gradient is not None:
        padded = np.zeros((mesh.n_cells, 3))
        padded[:, : mesh.dim] = gradient
        cell_data["grad_c"] = [padded[ids] for ids in order]

    result = meshio.Mesh(
        points,
        [(kind, np.array(cells, dtype=int)) for kind, cells in blocks],
        cell_data=cell_data,
    )

    tmp = _temp_path(path)
    try:
        meshio.write(tmp, result, file_format="vtk42", binary=False)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)

    log.debug("Wrote {0} cells to {1}".format(mesh.n_cells, path))
    return path


def write_report(path, checks):
    """Write acceptance checks as a JSON list of
    ``{name, value, expected, passed, detail}`` objects.
    """
    data = [dict(check._asdict()) for check in checks]
    return _atomic_write(path, json_dumps(data, indent=2) + "\n")


def _temp_path(path):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(
        prefix=".tmp-", suffix=os.path.splitext(path)[1], dir=directory
    )
    os.close(fd)
    return tmp


def _atomic_write(path, text):
    tmp = _temp_path(path)
    try:
        with open(tmp, "w", newline="") as fp:
            fp.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)
    return path
