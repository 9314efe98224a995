"""Exception hierarchy shared by every module."""


class HardyTreeError(ValueError):
    """Base class for all errors raised by hardytree."""


class DepthCapError(HardyTreeError):
    """A level beyond the configured depth cap was requested."""


class DomainError(HardyTreeError):
    """An argument lies outside the domain of an operation."""


class VertexFormatError(HardyTreeError):
    """Malformed vertex text, or a letter out of range for the given q."""


class CoverageError(HardyTreeError):
    """A self map or function was evaluated past the depth it covers."""


class FileFormatError(HardyTreeError):
    """A function or map file could not be parsed or validated."""
