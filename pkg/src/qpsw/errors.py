"""Exception types shared across the package.

``ValueError`` (and subclasses) signal bad input; :class:`ComputationError`
signals that valid input led to a numerically unusable result.  The CLI maps
the two onto exit codes 2 and 1.
"""


class ComputationError(RuntimeError):
    """A computation could not produce a trustworthy result."""


class RankDeficiencyError(ComputationError):
    pass


class NodeCollisionError(ComputationError):
    pass


class NoValidDelayError(ComputationError):
    pass


class EmptySignalError(ValueError):
    def __init__(self, message: str = "no samples"):
        super().__init__(message)
