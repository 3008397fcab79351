"""Exception hierarchy shared by all holderlab modules."""


class HolderLabError(Exception):
    """Base class for every error raised by holderlab."""


class DomainError(HolderLabError, ValueError):
    """Input outside the domain where an operation is defined."""


class OutOfRangeError(DomainError):
    pass


class SolverError(HolderLabError, RuntimeError):
    """An iterative solver failed to converge."""


class NonConvergenceError(SolverError):
    pass


class CoherenceError(SolverError):
    """cu/cs patches failed to intersect in a single leaf inside the tube."""


class HolonomyUndefinedError(HolderLabError):
    def __init__(self, message, exit_point=None):
        super().__init__(message)
        self.exit_point = exit_point


class TransversalityError(HolderLabError):
    pass


class AmalgamUndefinedError(HolderLabError):
    pass


class ShadowingError(HolderLabError):
    pass


class ConditionViolatedError(HolderLabError, ValueError):
    pass


class InsufficientDataError(HolderLabError, ValueError):
    pass


class DegenerateInputError(DomainError):
    pass


class ConfigError(HolderLabError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
