"""Secret key rates for continuous-variable QKD with PSK coherent-state modulation."""

__version__ = "0.1.0"

from .errors import ConfigError, PhysicalityError, TruncationError
from .modulation import (
    ModulationScheme,
    SourceCovariance,
    correlation_Z,
    gaussian_correlation,
    psk_eigenvalues,
    psk8_eigenvalues_closed,
    source_covariance,
)
from .channel import (
    Detection,
    DetectorParams,
    LinkParams,
    NoiseBudget,
    noise_budget,
    simulate_quadratures,
    transmittance,
)
from .keyrate import KeyRateReport, Path, mutual_information, secret_key_rate

__all__ = [
    "ConfigError",
    "Detection",
    "DetectorParams",
    "KeyRateReport",
    "LinkParams",
    "ModulationScheme",
    "NoiseBudget",
    "Path",
    "PhysicalityError",
    "SourceCovariance",
    "TruncationError",
    "correlation_Z",
    "gaussian_correlation",
    "mutual_information",
    "noise_budget",
    "psk8_eigenvalues_closed",
    "psk_eigenvalues",
    "secret_key_rate",
    "simulate_quadratures",
    "source_covariance",
    "transmittance",
]
