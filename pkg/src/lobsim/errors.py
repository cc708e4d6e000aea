"""Exception types shared across the package."""


class LobsimError(Exception):
    """Base class for all package errors."""


class SignPatternViolation(LobsimError):
    """A raw queue vector breaks the bid/ask sign interleaving.

    Carries the offending signed index in ``index``.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"sign pattern violated at index {index}")


class AbsorbingStateError(LobsimError):
    """Total outgoing rate is zero at some state."""

    def __init__(self, q):
        self.q = tuple(int(x) for x in q)
        super().__init__(f"absorbing state encountered: q={self.q}")


class InvalidEventError(LobsimError):
    """An event would move the book outside its state space."""


class RadiusExceededError(LobsimError):
    """A generating-function evaluation was requested beyond the model's radius."""


class EmptyScanError(LobsimError):
    """A drift or assumption check was called with no states to scan."""


class DivergentBoundaryMomentError(LobsimError):
    """Monte Carlo estimate of a boundary/reinit moment failed its stability check."""


class ReducibleError(LobsimError):
    """The truncated generator is not irreducible."""

    def __init__(self, closed_classes):
        self.closed_classes = closed_classes
        super().__init__(
            f"generator is reducible: {len(closed_classes)} closed communicating class(es)"
        )


class IllConditionedError(LobsimError):
    """Stationary solve residual exceeded tolerance."""

    def __init__(self, residual, tol):
        self.residual = residual
        self.tol = tol
        super().__init__(f"stationary solve residual {residual:.3e} exceeds {tol:.3e}")


class StateSpaceTooLargeError(LobsimError):
    """Truncated state enumeration exceeds the configured bound."""

    def __init__(self, count, bound):
        self.count = count
        self.bound = bound
        super().__init__(f"truncated state space has {count} states, bound is {bound}")


class WindowTooLargeError(LobsimError):
    """Autocovariance lag window is too large for the sample."""


class ConfigError(LobsimError):
    """A run configuration failed validation.

    ``violations`` is a list of human-readable constraint names.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
