"""Exception types raised by gibbsgate."""


class GibbsgateError(Exception):
    """Base class for all library errors."""


class JointError(GibbsgateError, ValueError):
    """Invalid input when building a distribution, event or partition."""


class BudgetExceeded(GibbsgateError, ValueError):
    """An exhaustive scan would exceed its enumeration budget."""


class InvariantViolation(GibbsgateError, AssertionError):
    """Two independent computations that must agree did not."""
