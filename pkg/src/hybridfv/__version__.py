# -*- coding: utf-8 -*-
"""Project version information."""

from ._compat import dist_version


# None when the package is not installed.
__version__ = dist_version(__name__.split(".")[0])
