"""Shared exception types.

The CLI maps these onto exit codes: domain errors (bad parameters,
infeasible instances, uncharacterized regions) exit 1, usage errors exit 2,
exhausted search budgets exit 3.
"""


class DesignError(ValueError):
    """Invalid parameters or malformed design data."""


class InfeasibleDesignError(DesignError):
    """No design with the requested parameters can correct the target defects."""


class RegionUnknownError(DesignError):
    """The requested trade-off region has no known characterization."""


class BudgetExceededError(RuntimeError):
    """An exhaustive search ran out of its evaluation budget.

    Raised instead of returning an approximate answer: a caller must never
    mistake an aborted search for a verified negative result.
    """
