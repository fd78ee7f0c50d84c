# -*- coding: utf-8 -*-
# flake8: noqa
# pylint: skip-file
"""
SciPy and packaging-metadata compatibility.

Iterative solvers renamed their relative tolerance keyword from ``tol`` to
``rtol`` (SciPy 1.12) and ``pkg_resources`` is being phased out in favour of
``importlib.metadata``. Keep the shims here so the rest of the package can
use one spelling.
"""

import inspect

from scipy.sparse import linalg as spla


try:
    from importlib.metadata import version as _dist_version, PackageNotFoundError
except ImportError:  # pragma: no cover
    from pkg_resources import get_distribution, DistributionNotFound

    PackageNotFoundError = DistributionNotFound

    def _dist_version(name):
        return get_distribution(name).version


def dist_version(name):
    """Return installed distribution version for `name` or ``None``."""
    try:
        return _dist_version(name)
    except PackageNotFoundError:  # pragma: no cover
        return None


_BICGSTAB_RTOL = "rtol" in inspect.signature(spla.bicgstab).parameters


def bicgstab(A, b, rtol, atol=0.0, maxiter=None, M=None, callback=None):
    """Call :func:`scipy.sparse.linalg.bicgstab` with a relative tolerance
    regardless of the installed SciPy's keyword name.
    """
    if _BICGSTAB_RTOL:
        return spla.bicgstab(
            A, b, rtol=rtol, atol=atol, maxiter=maxiter, M=M, callback=callback
        )
    return spla.bicgstab(  # pragma: no cover
        A, b, tol=rtol, atol=atol, maxiter=maxiter, M=M, callback=callback
    )
