"""Exception types raised across the package."""


class ThurstonFlowError(Exception):
    """Base class for all package errors."""


class UnsupportedGeometryError(ThurstonFlowError):
    """A limit-only geometry was passed where a flowable one is required."""


class InvalidPointError(ThurstonFlowError, ValueError):
    """A chart point lies outside the chart (e.g. ``y <= 0`` on SL2)."""


class InvalidMatrixError(ThurstonFlowError, ValueError):
    """A 2x2 matrix does not have unit determinant."""


class NoClosedFormError(ThurstonFlowError):
    """No explicit solution is available for this geometry/flow pair."""


class IncompleteIntegrationError(ThurstonFlowError):
    """The step budget ran out; ``partial`` holds what was computed."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class FitDomainError(ThurstonFlowError, ValueError):
    """A power-law fit was requested on nonpositive data or too few samples."""


class InsufficientWindowError(ThurstonFlowError):
    """A trajectory is too short to support a two-decade fit window."""


class OutOfDomainError(ThurstonFlowError, ValueError):
    """A rescaled time falls outside the solution's interval of existence."""


class DivergedError(ThurstonFlowError):
    """A limit sequence failed its Cauchy test."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UnsupportedFieldError(ThurstonFlowError, ValueError):
    """A vector field is not affine in the chart coordinates."""
