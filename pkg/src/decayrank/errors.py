"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter is outside its valid domain."""


class SnapshotFormatError(ValueError):
    """A ranker snapshot could not be decoded.

    ``field`` names the offending entry of the document.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class BudgetExceededError(RuntimeError):
    """An exact enumeration would exceed its path budget."""


class HypothesisViolationError(ParameterError):
    """Inputs violate a hypothesis an operation depends on (e.g. distinct q)."""
