"""Exception types raised across the package."""


class BPDDError(Exception):
    """Base class for all package errors."""


class StructuralInputError(BPDDError, ValueError):
    """Input rows are ragged, unordered or otherwise malformed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class WindowSizeError(BPDDError, ValueError):
    """Too few channels or samples to form a usable window."""


class DegenerateReferenceError(BPDDError, ValueError):
    def __init__(self, channel):
        super().__init__(f"normalization reference for channel {channel!r} is zero")
        self.channel = channel


class ParameterError(BPDDError, ValueError):
    """A numeric parameter lies outside its admissible range."""


class ProfileUndefinedError(BPDDError, ValueError):
    """Fewer than two subsequences exist, so no neighbor can be found."""


class EmptyProfileError(BPDDError, ValueError):
    """No evaluated profile entries are available for statistics."""


class InjectionError(BPDDError, ValueError):
    """A bad-data scenario does not fit the target window."""


class EmptyEvaluationError(BPDDError, ValueError):
    """Metrics were requested for zero instances."""
