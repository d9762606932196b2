"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An input violates a documented precondition or tolerance contract."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or produced unusable output."""


class FeasibilityError(ValueError):
    """A design was requested in an antenna/path regime that cannot support it."""
