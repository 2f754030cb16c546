"""Exception hierarchy shared across the package.

Plain argument/domain violations raise ValueError; the classes here mark
*numerical* failures and carry the diagnostic the caller needs to act on.
"""


class SrfisherError(Exception):
    """Base class for numerical failures in this package."""


class QuadratureError(SrfisherError):
    """Quadrature did not converge to the requested tolerance."""

    def __init__(self, message, residual, tolerance):
        super().__init__(f"{message} (residual {residual:.3e}, tolerance {tolerance:.3e})")
        self.residual = residual
        self.tolerance = tolerance


class NormalizationError(SrfisherError):
    """PSF profile is not unit-normalized on the quadrature grid."""

    def __init__(self, norm, tolerance):
        super().__init__(
            f"profile norm integral is {norm!r}, deviates from 1 beyond tolerance {tolerance:.3e}"
        )
        self.norm = norm
        self.tolerance = tolerance


class ConsistencyError(SrfisherError):
    """A quantity that must be non-negative / self-consistent came out wrong."""


class CutoffError(SrfisherError):
    """Fock-space cutoff too small for the requested occupation."""

    def __init__(self, message, tail_mass, bound):
        super().__init__(f"{message} (tail mass {tail_mass:.3e}, bound {bound:.3e})")
        self.tail_mass = tail_mass
        self.bound = bound


class SingularSystemError(SrfisherError):
    """Matrix equation is singular with an incompatible right-hand side."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class IllConditionedError(SrfisherError):
    """Linear solve refused: condition number beyond the configured guard."""

    def __init__(self, message, condition):
        super().__init__(f"{message} (condition number {condition:.3e})")
        self.condition = condition


class RegimeError(SrfisherError):
    """Requested asymptotic regime is unavailable for these inputs."""
