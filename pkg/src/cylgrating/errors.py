"""Exception hierarchy shared by every module of the package."""


class GratingError(Exception):
    """Base class for all errors raised by cylgrating."""


class ConfigError(GratingError, ValueError):
    """Invalid configuration (bad key, bad value, violated invariant)."""


class DomainError(GratingError, ValueError):
    """Argument outside the domain of a function (e.g. non-finite, x <= 0)."""


class BranchPointError(ConfigError):
    """eps_r * mu_r <= cos^2(theta_i): the interior wavenumber is not real and positive."""


class DegenerateMediumError(GratingError, ArithmeticError):
    """The polarization denominator D vanishes."""


class ResonanceError(GratingError, ArithmeticError):
    """Vanishing denominator in an isolated-cylinder coefficient."""


class AnomalyError(GratingError, ArithmeticError):
    """Configuration sits on (or too close to) a grating anomaly."""


class NoConvergenceError(GratingError, ArithmeticError):
    """An iterative or accelerated procedure failed to reach its tolerance."""


class SingularSystemError(GratingError, ArithmeticError):
    """The truncated linear system is singular or too ill-conditioned."""


class TruncationError(GratingError, ArithmeticError):
    """Mode truncation did not converge within the allowed order."""


class NumericalError(GratingError, ArithmeticError):
    """Umbrella used by the command line to map numerical failures to an exit code."""


NUMERICAL_ERRORS = (
    DegenerateMediumError,
    ResonanceError,
    AnomalyError,
    NoConvergenceError,
    SingularSystemError,
    TruncationError,
    NumericalError,
)
