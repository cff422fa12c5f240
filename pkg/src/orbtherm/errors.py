"""Exception hierarchy shared across the package."""


class OrbthermError(Exception):
    """Base class for all domain errors raised by orbtherm."""


class ModelValidationError(OrbthermError, ValueError):
    """A thermal model violates one of its structural invariants."""


class ProfileError(OrbthermError, ValueError):
    """A heat-input profile is malformed or inconsistent."""


class ConvergenceError(OrbthermError):
    """An iterative procedure stopped before reaching its tolerance.

    Attributes:
        last_iterate: Final state reached before giving up.
        residual: Residual (or mismatch) associated with ``last_iterate``.
    """

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class SingularJacobianError(OrbthermError):
    """The Jacobian could not be inverted; the model breaks an invariant."""


class SpectralError(OrbthermError):
    """Eigen-decomposition produced results outside the supported regime."""


class IntegrationError(OrbthermError):
    """The time integrator failed (step underflow or non-finite state)."""
