"""Exception hierarchy shared by every module."""


class ModelError(Exception):
    """Base class for errors raised by the dengue model."""


class DomainError(ModelError, ValueError):
    """An input lies outside the domain where a formula is defined."""


class ViabilityError(ModelError):
    """The mosquito population cannot sustain itself (N_M <= 0)."""


class NumericalError(ModelError, ArithmeticError):
    """A computation produced an unusable number (e.g. negative discriminant)."""


class StiffnessError(NumericalError):
    """The adaptive step size collapsed below its floor."""


class InsufficientData(ModelError, ValueError):
    pass


class ConfigError(ModelError, ValueError):
    pass


class DiseaseFreeTransition(UserWarning):
    """A parameter perturbation moved the system across the R0 = 1 threshold."""
