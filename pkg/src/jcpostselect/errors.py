"""Exception types raised by the simulator."""


class TruncationError(ValueError):
    """The Fock cutoff discards more probability mass than allowed."""


class DegenerateTraceError(ArithmeticError):
    """A post-selected density operator has (numerically) zero trace."""


class NumericalError(RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""


class ConfigError(ValueError):
    """Invalid user configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class UndefinedMeanError(ValueError):
    """A quantity normalized by the mean photon number was requested at zero mean."""
