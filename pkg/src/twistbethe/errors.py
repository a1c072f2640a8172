"""Exception hierarchy shared by all modules."""


class BetheError(Exception):
    """Base class for every error raised by twistbethe."""


class ModelError(BetheError, ValueError):
    """Invalid model parameters."""


class GenericityError(ModelError):
    """XXZ anisotropy too close to a root of unity."""


class DimensionError(BetheError, ValueError):
    """Number of roots does not match the magnon number."""


class PoleError(BetheError, ZeroDivisionError):
    """A root sits (numerically) on a pole of the expression being evaluated."""


class UnsupportedModelError(BetheError, NotImplementedError):
    """The requested quantity is not defined for this model family / spin."""


class NotDecomposableError(BetheError, ValueError):
    """Roots contain part of an exact string but not all of it."""

    def __init__(self, message, present=(), missing=()):
        super().__init__(message)
        self.present = tuple(present)
        self.missing = tuple(missing)


class UnphysicalError(BetheError, ValueError):
    """A singular solution that fails the physicality constraint was used where a genuine eigenstate is needed."""


class NumericalError(BetheError, ArithmeticError):
    """Base class for numerical failures (CLI exit code 2)."""


class ConvergenceError(NumericalError):
    """Newton iteration did not converge."""


class SingularJacobianError(NumericalError):
    """Newton iteration hit a (numerically) singular Jacobian."""


class InconsistentSystemError(NumericalError):
    """An order-by-order linear system has no solution."""


class PathTrackingError(NumericalError):
    """Homotopy step bisection exhausted."""


class PrecisionError(NumericalError):
    """Working precision is insufficient for the requested limit."""


class SizeCapError(BetheError, ValueError):
    """Chain too long for an explicit 2^N operator."""
