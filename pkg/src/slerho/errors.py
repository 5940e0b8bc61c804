"""Exception types shared across the package."""


class SlerhoError(Exception):
    """Base class for all package errors."""


class DomainError(SlerhoError, ValueError):
    """A parameter lies outside the validity region of a formula."""


class UnsupportedError(SlerhoError):
    """A requested configuration is deliberately not implemented."""


class SwallowedError(SlerhoError):
    """A tracked point entered the growing hull during a forward map evaluation."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"point swallowed by the hull at step {step}")


class TraceError(SlerhoError):
    """Trace construction failed at a specific step."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"trace computation failed at step {step}")


class GeometryError(SlerhoError):
    """An input arc or hull violates a geometric precondition."""


class HullHitError(SlerhoError):
    """The curve hit the reference hull before the requested time."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"curve hit the hull by step {step}")


class ExperimentInvalidError(SlerhoError):
    """An experiment tripped an internal validity flag (e.g. zipper failure rate)."""


class SchemaError(SlerhoError, ValueError):
    """A CSV file does not match the documented schema."""
