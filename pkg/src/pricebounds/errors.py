"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An argument violates a documented precondition or invariant."""


class InfeasibleBoxError(ContractViolationError):
    """A price box has a lower bound above its upper bound."""


class FlaggedTrialError(RuntimeError):
    """A trial produced a metric that cannot be interpreted (e.g. nonpositive
    reference revenue).  Harness code catches this, logs the trial, and moves
    on; it is never silently swallowed."""
