"""Exception types raised across the package."""

import numpy as np


class GraphParseError(ValueError):
    """The graph file is not valid JSON or does not follow the schema."""


class GraphValidationError(ValueError):
    """A graph violates a structural invariant (loop, multi-edge, weights, ...)."""

    def __init__(self, message, item=None):
        super().__init__(message)
        self.item = item


class TruncationError(ValueError):
    """The stored truncation is too small for the requested computation."""


class SingularSystemError(np.linalg.LinAlgError):
    """The interior block of H is singular; carries the smallest singular value."""

    def __init__(self, message, smallest_singular_value):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class EigensolverError(RuntimeError):
    """An eigenpair failed its residual check."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual
