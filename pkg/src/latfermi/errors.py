"""Shared exception types."""


class BudgetExceededError(RuntimeError):
    """An enumeration or matrix build exceeded its configured resource budget."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach the requested tolerance."""
