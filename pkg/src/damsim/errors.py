"""Exception hierarchy shared by every damsim module."""


class DamError(Exception):
    """Base class for all simulator errors."""

    exit_code = 3


class ConfigError(DamError, ValueError):
    """A configuration value violates its declared invariant."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DimensionError(DamError, ValueError):
    pass


class EmptyInputError(DamError, ValueError):
    pass


class InsufficientDataError(DamError, ValueError):
    pass


class ParameterError(DamError, ValueError):
    pass


class QuantityError(DamError, ValueError):
    """Requested more samples than a provider holds."""


class SampleCountError(DamError, ValueError):
    pass


class AffordabilityError(DamError, ValueError):
    """A provider's full dataset costs more than the acquirer's budget."""


class AllocationError(DamError, ValueError):
    pass


class BudgetExceededError(DamError, ValueError):
    exit_code = 5


class IncompleteDataError(DamError, ValueError):
    pass


class FileFormatError(DamError, ValueError):
    """A market, decision or score file could not be parsed."""

    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{path}: {message}")
