class StackSimError(Exception):
    pass


class DomainError(StackSimError, ValueError):
    """An argument is outside the domain of an operation."""


class ConfigError(StackSimError, ValueError):
    pass


class CapacityError(StackSimError):
    pass


class TraceFormatError(StackSimError):
    pass


class TraceValidationError(StackSimError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class AccountingError(StackSimError, AssertionError):
    """Traffic ledger invariant breached; indicates a simulator bug."""
