"""Exception types shared across the package."""


class NullForcingError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NullForcingError, ValueError):
    """An object was constructed with data that breaks its invariants."""


class PreconditionViolated(NullForcingError, ValueError):
    """An operation was called on inputs outside its domain."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class DepthExhausted(NullForcingError):
    """A clopen index or stage cannot be resolved within the configured caps."""


class CertificateFailure(NullForcingError, AssertionError):
    """A machine-checked postcondition failed. Always an implementation bug."""
