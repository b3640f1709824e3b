"""Shared exception types."""


class PreconditionError(ValueError):
    """An operation's mathematical precondition does not hold."""


class BudgetExceededError(RuntimeError):
    """An exact computation would exceed its compute budget."""
