# -*- coding: utf-8 -*-
"""Exceptions module."""


__all__ = (
    "HybridFVError",
    "IdentifiedError",
    "MeshError",
    "MeshInputError",
    "DegenerateCellError",
    "PerturbationError",
    "MeshFormatError",
    "FieldError",
    "InterpolationError",
    "SchemeError",
    "TensorError",
    "FluxContractError",
    "AssemblyError",
    "ZeroPivotError",
    "SolverError",
    "SingularMatrixError",
    "SolverConvergenceError",
    "PicardConvergenceError",
    "ProblemError",
    "ConfigError",
)


class HybridFVError(Exception):
    """Base exception for all hybridfv errors."""

    code = "error"
    description = "Unspecified error"


class IdentifiedError(HybridFVError):
    """Base exception for errors tied to a single mesh entity (cell, face or
    vertex index).
    """

    def __init__(self, identifier, message=None):
        super(IdentifiedError, self).__init__(
            message or self.description, identifier
        )
        self.identifier = identifier
        self.message = message or self.description

    def __str__(self):
        return "{0} (code={1}): {2} for identifier {3}".format(
            self.__class__.__name__, self.code, self.message, self.identifier
        )

    def __repr__(self):  # pragma: no cover
        return str(self)


class MeshError(HybridFVError):
    """Base exception for mesh construction and geometry errors."""

    code = "mesh"
    description = "Invalid mesh"


class MeshInputError(MeshError):
    """Exception for invalid mesh builder arguments or connectivity."""

    code = "mesh-input"
    description = "Invalid mesh input"


class DegenerateCellError(IdentifiedError, MeshError):
    """Exception for a cell or face with zero (or negative) measure."""

    code = "degenerate-cell"
    description = "Cell has non-positive measure"


class PerturbationError(IdentifiedError, MeshError):
    """Exception for a vertex that cannot be moved without inverting a cell."""

    code = "perturbation"
    description = "Vertex perturbation inverts an incident cell"


class MeshFormatError(MeshError):
    """Exception for malformed mesh text files."""

    code = "mesh-format"
    description = "Malformed mesh file"


class FieldError(HybridFVError):
    """Base exception for hybrid field errors."""

    code = "field"
    description = "Invalid hybrid field"


class InterpolationError(FieldError):
    """Exception raised when an exact field cannot be evaluated."""

    code = "interpolation"
    description = "Field evaluation failed"


class SchemeError(HybridFVError):
    """Base exception for discretisation errors."""

    code = "scheme"
    description = "Invalid scheme configuration"


class TensorError(IdentifiedError, SchemeError):
    """Exception for a diffusion tensor that is not symmetric positive
    definite.
    """

    code = "tensor"
    description = "Diffusion tensor is not symmetric positive definite"


class FluxContractError(IdentifiedError, SchemeError):
    """Exception raised when a second-order cell-centered flux is requested on
    a cell flagged as near the boundary.
    """

    code = "flux-contract"
    description = "Second-order flux requested on a near-boundary cell"


class AssemblyError(HybridFVError):
    """Base exception for assembly and condensation errors."""

    code = "assembly"
    description = "Assembly failed"


class ZeroPivotError(IdentifiedError, AssemblyError):
    """Exception for a balance row without a usable cell pivot."""

    code = "zero-pivot"
    description = "Zero pivot on cell unknown"


class SolverError(HybridFVError):
    """Base exception for linear and nonlinear solver errors."""

    code = "solver"
    description = "Solver failed"


class SingularMatrixError(SolverError):
    """Exception for singular linear systems."""

    code = "singular"
    description = "Matrix is singular"


class SolverConvergenceError(SolverError):
    """Exception for iterative solves that miss their tolerance."""

    code = "no-convergence"
    description = "Iterative solver did not converge"

    def __init__(self, residual, iterations=None):
        super(SolverConvergenceError, self).__init__(
            "{0} (residual={1:.3e}, iterations={2})".format(
                self.description, residual, iterations
            )
        )
        self.residual = residual
        self.iterations = iterations


class PicardConvergenceError(SolverError):
    """Exception for limiter fixed-point iterations that do not settle."""

    code = "picard"
    description = "Picard iteration did not converge"

    def __init__(self, distance, iterations):
        super(PicardConvergenceError, self).__init__(
            "{0} (last distance={1:.3e}, iterations={2})".format(
                self.description, distance, iterations
            )
        )
        self.distance = distance
        self.iterations = iterations


class ProblemError(HybridFVError):
    """Exception for invalid problem parameters or data."""

    code = "problem"
    description = "Invalid problem definition"


class ConfigError(HybridFVError):
    """Exception for invalid study configuration."""

    code = "config"
    description = "Invalid configuration"

