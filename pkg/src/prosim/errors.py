"""Exception types shared across the package."""


class ProsimError(Exception):
    """Base class for all package errors."""


class ConfigurationError(ProsimError):
    """Invalid filter spec, pipeline config, or run config value."""


class SingularFitError(ProsimError):
    """Regression design matrix is rank deficient (e.g. constant columns)."""


class InsufficientDataError(ProsimError):
    """Not enough samples to compute the requested quantity."""


class UndefinedCorrelationError(ProsimError):
    """Correlation requested on a zero-variance series."""


class StiffnessInfeasibleError(ProsimError):
    """Stiffness reference below what the antagonist mechanism can realize."""


class InfeasibleEquilibriumError(ProsimError):
    """No taut-tendon equilibrium exists for the commanded motor angles."""


class InsufficientSignalError(ProsimError):
    """Recording contains no usable activity (e.g. no sustained contraction)."""
