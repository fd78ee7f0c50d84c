# -*- coding: utf-8 -*-
"""Utility functions."""

import numbers

try:
    import simplejson as json
except ImportError:  # pragma: no cover
    import json

import numpy as np


def json_dumps(data, indent=None):
    """Standardized json.dumps function with sorted keys and numpy support."""
    separators = (",", ":") if indent is None else (",", ": ")
    return json.dumps(
        data,
        separators=separators,
        sort_keys=True,
        indent=indent,
        default=_json_default,
    )


def parse_levels(text):
    """Parse a refinement level list.

    >>> parse_levels("1-3")
    [1, 2, 3]
    >>> parse_levels("2,4")
    [2, 4]
    """
    if isinstance(text, numbers.Integral):
        return [int(text)]
    if not isinstance(text, str):
        return [int(level) for level in text]

    levels = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            first, last = part.split("-", 1)
            levels.extend(range(int(first), int(last) + 1))
        else:
            levels.append(int(part))

    if not levels:
        raise ValueError("Empty level list {0!r}".format(text))
    return levels


def format_levels(levels):
    """Inverse of :func:`parse_levels` for contiguous ranges.

    >>> format_levels([1, 2, 3])
    '1-3'
    """
    levels = list(levels)
    if len(levels) > 1 and levels == list(range(levels[0], levels[-1] + 1)):
        return "{0}-{1}".format(levels[0], levels[-1])
    return ",".join(str(level) for level in levels)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError("{0!r} is not JSON serializable".format(obj))
