"""Exception hierarchy shared by the solver modules and the CLI."""


class QamGameError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QamGameError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BracketError(QamGameError):
    """A root-finding interval does not contain a sign change."""


class ConvergenceError(QamGameError):
    """An iterative method hit its iteration cap before converging."""


class ConfigurationError(QamGameError, ValueError):
    """A scheme or scenario is malformed (e.g. a missing coding gain)."""


class InfeasibleTargetError(DomainError):
    """A requested packet success rate is not reachable at any SIR."""


class InstabilityError(QamGameError):
    """The ARQ queue is unstable: f_b(gamma) <= lambda * tau."""


class DelayInfeasibleError(QamGameError):
    """No admissible constellation/rate meets a user's delay bound.

    ``user`` is the index of the offending user when raised from a
    multi-user solve, otherwise ``None``.
    """

    def __init__(self, message, user=None, eta=None):
        super().__init__(message)
        self.user = user
        self.eta = eta


class SystemInfeasibleError(QamGameError):
    """The users' SIR targets cannot be met simultaneously (sum of sizes >= 1)."""

    def __init__(self, message, sum_size=None):
        super().__init__(message)
        self.sum_size = sum_size
