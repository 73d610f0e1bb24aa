"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A mission, power, or budget configuration violates an invariant."""


class DegenerateOrbitError(ValueError):
    """Equinoctial state with w = 1 + f*cos(l) + g*sin(l) <= 0 (parabolic/escape geometry)."""


class ThrottleTableError(ValueError):
    """Throttle table failed to parse or failed a physical sanity check."""


class ContinuationAbortError(RuntimeError):
    """No continuation step converged; carries the trace collected so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class IntegrationFailureError(RuntimeError):
    """Reference propagation of one control interval did not converge."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval
