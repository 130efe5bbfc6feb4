"""Exception types shared across the package."""


class InputDomainError(ValueError):
    """An argument lies outside the domain an operation accepts."""


class ValidationError(ValueError):
    """A structure (heap, manifest, ...) fails its own consistency rules."""


class NumericalFailure(ArithmeticError):
    """A floating-point computation lost the accuracy it promised.

    ``diagnostics`` carries whatever the raising code knew at the time.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class IntegrationError(NumericalFailure):
    """A time integrator produced a non-finite state."""

    def __init__(self, message, last_valid=None, diagnostics=None):
        super().__init__(message, diagnostics)
        self.last_valid = last_valid


class InvariantViolation(AssertionError):
    """An exact identity that must hold did not."""
