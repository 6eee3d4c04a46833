"""Exception hierarchy shared by every stage."""


class HamdecError(Exception):
    """Base class for all library errors."""


class DomainError(HamdecError, ValueError):
    """An argument violates an operation's precondition."""


class InvariantViolation(HamdecError, AssertionError):
    """Internal state contradicts a guarantee; indicates a bug."""


class ConstructionFailure(HamdecError, RuntimeError):
    """A randomized or budgeted construction gave up.

    ``report`` carries whatever diagnostics the stage collected (achieved
    counts, worst offenders, the number of attempts made).
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report if report is not None else {}
