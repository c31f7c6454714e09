"""Exception types shared across the package."""


class ConvergenceError(RuntimeError):
    """A truncated lattice sum or iterative solver failed to converge
    within its configured budget (tier cap, iteration cap)."""


class ConfigError(ValueError):
    """Invalid experiment configuration (bad key, type, or precondition)."""
