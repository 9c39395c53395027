"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Inputs that must share a dimension (C or d) do not."""


class DegenerateInputError(ValueError):
    """Structurally valid input on which the operation is undefined (e.g. empty)."""


class InfeasibleBudgetError(ValueError):
    """Bound parameters violate a formula precondition (e.g. k too small for delta)."""


class OptimizationError(RuntimeError):
    """The objective misbehaved during a weight search (e.g. returned NaN)."""


class DataFormatError(ValueError):
    """A file does not match its declared layout."""
