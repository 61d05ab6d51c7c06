"""Exception types shared across the package."""


class IFSError(Exception):
    """Base class for every error raised by ifstopo."""


class InvalidInput(IFSError, ValueError):
    pass


class UnsupportedInput(InvalidInput):
    """Input is well formed but outside what the exact algorithms handle
    (non-diagonal maps for box images, non grid-aligned cells, ...)."""


class ResourceLimit(IFSError, RuntimeError):
    pass


class PropertyRefusal(IFSError):
    """A construction was refused because the space lacks a required
    topological property."""
