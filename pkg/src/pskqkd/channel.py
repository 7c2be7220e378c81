"""Fiber link and detector noise budget, plus a Monte-Carlo quadrature sampler.

All noises are in shot-noise units and referred to the channel input unless
stated otherwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import PhysicalityError
from .modulation import Kind, ModulationScheme


class Detection(str, enum.Enum):
    HOMODYNE = "homodyne"
    HETERODYNE = "heterodyne"


@dataclass(frozen=True)
class LinkParams:
    length_km: float
    excess_noise: float
    loss_db_per_km: float = 0.2

    def __post_init__(self):
        if self.length_km < 0:
            raise ValueError(f"length_km must be >= 0, got {self.length_km}")
        if self.loss_db_per_km < 0:
            raise ValueError(f"loss_db_per_km must be >= 0, got {self.loss_db_per_km}")
        if self.excess_noise < 0:
            raise ValueError(f"excess_noise must be >= 0, got {self.excess_noise}")


@dataclass(frozen=True)
class DetectorParams:
    mode: Detection = Detection.HOMODYNE
    efficiency: float = 0.6
    electronic_noise: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "mode", Detection(self.mode))
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"detector efficiency must lie in (0, 1], got {self.efficiency}")
        if self.electronic_noise < 0:
            raise ValueError(f"electronic_noise must be >= 0, got {self.electronic_noise}")


@dataclass(frozen=True)
class NoiseBudget:
    """Input-referred noise of a link + detector pair.

    ``epr_variance`` is the variance of the two-mode squeezed state that
    purifies the detector noise; it is None for a lossless detector
    (efficiency 1), where the beam-splitter model does not apply.
    """

    transmittance: float
    excess_noise: float
    chi_line: float
    chi_det: float
    chi_total: float
    epr_variance: float | None
    mode: Detection
    efficiency: float
    electronic_noise: float


def transmittance(link: LinkParams) -> float:
    return 10.0 ** (-link.loss_db_per_km * link.length_km / 10.0)


def noise_budget(link: LinkParams, det: DetectorParams) -> NoiseBudget:
    T = transmittance(link)
    if T <= 0.0:
        raise PhysicalityError(f"transmittance underflowed to 0 at L = {link.length_km} km")
    eta, v_el = det.efficiency, det.electronic_noise
    chi_line = 1.0 / T - 1.0 + link.excess_noise
    if det.mode is Detection.HOMODYNE:
        chi_det = ((1.0 - eta) + v_el) / eta
    else:
        chi_det = (1.0 + (1.0 - eta) + 2.0 * v_el) / eta
    chi_total = chi_line + chi_det / T

    if eta < 1.0:
        if det.mode is Detection.HOMODYNE:
            epr = eta * chi_det / (1.0 - eta)
        else:
            epr = (eta * chi_det - 1.0) / (1.0 - eta)
        if epr < 1.0 - 1e-12:
            raise PhysicalityError(f"detector model needs an EPR variance >= 1, got {epr}")
        epr = max(epr, 1.0)
    else:
        epr = None

    return NoiseBudget(
        transmittance=T,
        excess_noise=link.excess_noise,
        chi_line=chi_line,
        chi_det=chi_det,
        chi_total=chi_total,
        epr_variance=epr,
        mode=det.mode,
        efficiency=eta,
        electronic_noise=v_el,
    )


@dataclass(frozen=True)
class QuadratureStats:
    """Empirical x-quadrature variances at Bob's detector output (measured units)."""

    v_b: float
    v_b_given_a: float
    se_v_b: float
    se_v_b_given_a: float
    n_samples: int
    seed: int


def _variance_and_se(x):
    c = x - x.mean()
    m2 = np.mean(c * c)
    m4 = np.mean(c**4)
    return float(m2), float(math.sqrt(max(m4 - m2 * m2, 0.0) / len(x)))


def simulate_quadratures(scheme: ModulationScheme, link: LinkParams, det: DetectorParams,
                         n_samples: int = 100_000, seed: int = 0) -> QuadratureStats:
    """Sample Alice's x displacements and Bob's measured x quadrature.

    Bob's outcome is sqrt(eta*T) * x_A plus two independent Gaussian noises:
    the channel output noise eta*(1 + T*eps) and the detector noise
    eta*chi_det, which together add to eta*T*(1 + chi_total).
    The conditional variance is the residual of the linear regression of
    x_B on x_A. Standard errors come from the empirical fourth moments.
    """
    if n_samples < 10_000:
        raise ValueError(f"n_samples must be >= 10000, got {n_samples}")
    budget = noise_budget(link, det)
    T, eta = budget.transmittance, det.efficiency
    rng = np.random.default_rng(seed)

    if scheme.kind is Kind.GAUSSIAN:
        x_a = rng.normal(0.0, math.sqrt(scheme.va), n_samples)
    else:
        k = rng.integers(0, scheme.n_states, n_samples)
        x_a = 2.0 * scheme.alpha * np.cos(2.0 * np.pi * k / scheme.n_states)

    channel_noise = rng.normal(0.0, math.sqrt(eta * (1.0 + T * link.excess_noise)), n_samples)
    detector_noise = rng.normal(0.0, math.sqrt(eta * budget.chi_det), n_samples)
    x_b = math.sqrt(eta * T) * x_a + channel_noise + detector_noise

    v_b, se_b = _variance_and_se(x_b)
    ca = x_a - x_a.mean()
    var_a = float(np.mean(ca * ca))
    if var_a > 0.0:
        slope = float(np.mean(ca * (x_b - x_b.mean()))) / var_a
        residual = x_b - slope * x_a
    else:
        residual = x_b
    v_ba, se_ba = _variance_and_se(residual)
    return QuadratureStats(v_b, v_ba, se_b, se_ba, n_samples, seed)
