"""Exception types shared across the package."""


class MsliftError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(MsliftError):
    """Malformed input data (bad construction arguments or file contents)."""


class DomainMismatchError(MsliftError):
    """Two objects that must live on the same interval do not."""


class CancellationError(MsliftError):
    """A column carries overlapping opposite-orientation jump contributions."""

    def __init__(self, message: str, t_interval: tuple[float, float] | None = None):
        super().__init__(message)
        self.t_interval = t_interval


class ProfileSizeError(MsliftError):
    """A column profile exceeds the size limit of the LP oracle."""


class SimplexError(MsliftError):
    """The dense simplex solver failed (unbounded problem or iteration cap)."""


class DecompositionError(MsliftError):
    """A decomposition stage violated one of its verified invariants.

    Carries the residual mismatch so failures are diagnosable, never swallowed.
    """

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}
