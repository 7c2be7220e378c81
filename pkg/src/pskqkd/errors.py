class ConfigError(ValueError):
    """Invalid or unparseable sweep configuration."""


class PhysicalityError(ArithmeticError):
    """A covariance matrix or parameter set does not describe a physical state."""


class TruncationError(ValueError):
    """The Fock-space cutoff discards more probability mass than allowed."""
