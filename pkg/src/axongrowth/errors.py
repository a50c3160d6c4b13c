"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration. ``path`` names the offending field (e.g. ``trigger.sigma``)."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class RunawayLengthError(ArithmeticError):
    """The length error grew past the range where exp(lambda * z2) is representable."""


class SimulationAborted(RuntimeError):
    """A run stopped early; ``reason`` is a short machine-readable tag."""

    def __init__(self, reason, t):
        self.reason = reason
        self.t = t
        super().__init__(f"simulation aborted at t={t:.6g} s: {reason}")
