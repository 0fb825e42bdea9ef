"""Exception hierarchy shared by every flowembed module."""

from __future__ import annotations


class FlowEmbedError(Exception):
    """Base class for all library errors."""


class ParameterError(FlowEmbedError, ValueError):
    pass


class DomainError(FlowEmbedError, ValueError):
    pass


class WindowError(FlowEmbedError, ValueError):
    pass


class GridError(FlowEmbedError, ValueError):
    pass


class ValidationError(FlowEmbedError, ValueError):
    """Marker invariants violated; ``offending`` lists the bad indices."""

    def __init__(self, message: str, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class SearchError(FlowEmbedError, RuntimeError):
    pass


class ContourError(FlowEmbedError, RuntimeError):
    pass


class DecompositionError(FlowEmbedError, RuntimeError):
    pass


class IterationError(FlowEmbedError, RuntimeError):
    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class DepthError(FlowEmbedError, ValueError):
    pass


class InversionError(FlowEmbedError, ValueError):
    pass


class PreconditionError(FlowEmbedError, ValueError):
    pass


class UnsupportedRoofError(FlowEmbedError, ValueError):
    pass
