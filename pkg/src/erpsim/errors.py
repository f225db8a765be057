"""Exception types shared across the solver and strategy layers."""


class ErpsimError(Exception):
    """Base class for package-specific failures."""


class InvalidState(ErpsimError):
    """A player configuration violates a required invariant (e.g. a pursuer
    already within capture range of the evader)."""


class MaxIterExceeded(ErpsimError):
    """An iterative solver did not converge within its iteration budget."""


class SingularActiveSet(ErpsimError):
    """The active constraint gradients are (near-)parallel, so the multiplier
    system has no unique solution."""


class DegenerateDenominator(ErpsimError):
    """A closed-form velocity expression hit a vanishing denominator."""


class NotApplicable(ErpsimError):
    """The requested operation has no meaning for this input (e.g. coalition
    reduction when the enclosure already touches the goal)."""
