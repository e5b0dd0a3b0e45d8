"""Exception hierarchy shared by all modules."""


class StarkEmbedError(Exception):
    """Base class for package errors."""


class ArgumentError(StarkEmbedError, ValueError):
    """Invalid argument (bad grid, unknown option, empty input)."""


class DomainError(StarkEmbedError, ValueError):
    """Evaluation outside the domain of a function or map."""


class IntegrationError(StarkEmbedError, RuntimeError):
    """An integration failed; ``last_state`` holds the last good state."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class StiffnessError(IntegrationError):
    """Step size fell below the representable minimum."""


class FrameError(IntegrationError):
    """The modified frame is undefined (``1 - H <= 0``)."""


class EventError(IntegrationError):
    """A sign-switching event could not be localized."""


class PreconditionError(StarkEmbedError):
    """Inputs violate a hypothesis of the requested construction."""


class InfeasibleScheduleError(PreconditionError):
    """No block schedule satisfies the requested envelope."""


class NonApplicableError(StarkEmbedError):
    """A diagnostic whose hypotheses fail for the given input."""
