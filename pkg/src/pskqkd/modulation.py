"""Alice's constellation: PSK ensemble spectrum, correlations and source covariance.

Quadratures are in shot-noise units (vacuum variance 1), so a coherent
amplitude ``alpha`` corresponds to a modulation variance ``va = 2 * alpha**2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

_SERIES_RTOL = 1e-18


class Kind(str, enum.Enum):
    PSK = "psk"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class ModulationScheme:
    """What Alice sends: an N-state PSK constellation or a Gaussian ensemble.

    Build instances with :meth:`psk`, :meth:`psk_from_variance` or
    :meth:`gaussian` rather than the raw constructor.
    """

    kind: Kind
    alpha: float
    n_states: int = 0
    va: float = field(init=False)

    def __post_init__(self):
        if self.alpha < 0 or not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if self.kind is Kind.PSK and self.n_states < 2:
            raise ValueError(f"PSK needs n_states >= 2, got {self.n_states}")
        object.__setattr__(self, "va", 2.0 * self.alpha**2)

    @classmethod
    def psk(cls, n_states: int, alpha: float) -> ModulationScheme:
        return cls(Kind.PSK, float(alpha), int(n_states))

    @classmethod
    def psk_from_variance(cls, n_states: int, va: float) -> ModulationScheme:
        if va < 0:
            raise ValueError(f"modulation variance must be >= 0, got {va}")
        return cls(Kind.PSK, math.sqrt(va / 2.0), int(n_states))

    @classmethod
    def gaussian(cls, va: float) -> ModulationScheme:
        if va < 0:
            raise ValueError(f"modulation variance must be >= 0, got {va}")
        return cls(Kind.GAUSSIAN, math.sqrt(va / 2.0))

    @property
    def V(self) -> float:
        return self.va + 1.0

    @property
    def label(self) -> str:
        if self.kind is Kind.GAUSSIAN:
            return "gaussian"
        return f"psk{self.n_states}"


@dataclass(frozen=True)
class PskSpectrum:
    """Eigenvalues of the equal-weight PSK mixture, indexed by Fock residue class."""

    lambdas: np.ndarray
    alpha: float
    n_states: int

    def __iter__(self):
        return iter(self.lambdas)

    def __len__(self):
        return len(self.lambdas)

    def __getitem__(self, k):
        return self.lambdas[k]


@dataclass(frozen=True)
class SourceCovariance:
    """Entries of the two-mode matrix [[x*I, z*sz], [z*sz, y*I]], sz = diag(1, -1)."""

    x: float
    y: float
    z: float

    @property
    def V(self) -> float:
        return self.x

    def matrix(self) -> np.ndarray:
        sz = np.diag([1.0, -1.0])
        return np.block([[self.x * np.eye(2), self.z * sz], [self.z * sz, self.y * np.eye(2)]])


def _check_psk_args(n_states, alpha):
    if n_states < 2:
        raise ValueError(f"n_states must be >= 2, got {n_states}")
    if alpha < 0 or not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite and >= 0, got {alpha}")


def _log_residue_masses(n_states: int, alpha: float) -> np.ndarray:
    """log of the Poisson(alpha**2) mass on each residue class mod n_states.

    Entries are -inf where the mass is exactly zero (alpha = 0, k > 0).
    """
    x = alpha * alpha
    out = np.full(n_states, -np.inf)
    if alpha == 0.0:
        out[0] = 0.0
        return out
    log_x = 2.0 * math.log(alpha)  # survives alpha**2 underflowing to 0
    log_rtol = math.log(_SERIES_RTOL)
    for k in range(n_states):
        m = k
        log_partial = -math.inf
        while True:
            log_term = -x + m * log_x - math.lgamma(m + 1)
            # terms rise until m ~ x, so only stop on the falling side
            if m > x and log_term < log_partial + log_rtol:
                break
            log_partial = float(np.logaddexp(log_partial, log_term))
            m += n_states
        out[k] = log_partial
    return out


def psk_eigenvalues(n_states: int, alpha: float) -> PskSpectrum:
    """Spectrum of the N-state PSK mixture via residue-class Poisson sums.

    lambda_k = exp(-a^2) * sum_{n>=0} a^(2(Nn+k)) / (Nn+k)!

    >>> psk_eigenvalues(8, 0.0).lambdas[:2]
    array([1., 0.])
    """
    _check_psk_args(n_states, alpha)
    lam = np.exp(_log_residue_masses(n_states, alpha))
    return PskSpectrum(lam, float(alpha), int(n_states))


def psk8_eigenvalues_closed(alpha: float) -> PskSpectrum:
    """Closed-form eight-state spectrum in terms of (hyperbolic) trig functions.

    Kept as an independent cross-check of :func:`psk_eigenvalues`; it loses
    relative accuracy on the smallest eigenvalues at small alpha through
    cancellation, but stays accurate in absolute terms.
    """
    _check_psk_args(8, alpha)
    x = alpha * alpha
    y = x / math.sqrt(2.0)
    pre = 0.25 * math.exp(-x)
    r2 = math.sqrt(2.0)
    ch, sh, c, s = math.cosh(x), math.sinh(x), math.cos(x), math.sin(x)
    cy, sy, chy, shy = math.cos(y), math.sin(y), math.cosh(y), math.sinh(y)

    lam = np.empty(8)
    for k, sign in ((0, 1.0), (4, -1.0)):
        lam[k] = pre * (ch + c + sign * 2.0 * cy * chy)
    for k, sign in ((1, 1.0), (5, -1.0)):
        lam[k] = pre * (sh + s + sign * r2 * cy * shy + sign * r2 * sy * chy)
    for k, sign in ((2, 1.0), (6, -1.0)):
        lam[k] = pre * (ch - c + sign * 2.0 * sy * shy)
    for k, sign in ((3, 1.0), (7, -1.0)):
        lam[k] = pre * (sh - s - sign * r2 * cy * shy + sign * r2 * sy * chy)
    return PskSpectrum(lam, float(alpha), 8)


def correlation_Z(n_states: int, alpha: float) -> float:
    """Cross-correlation <ab + a^dag b^dag> of the PSK purification.

    Z_N = 2 a^2 sum_k lambda_{k-1}^{3/2} / lambda_k^{1/2}, indices cyclic mod N.
    Each term is evaluated in log space so that tiny eigenvalues at small
    alpha never produce 0/0; alpha = 0 returns 0 (the limit).
    """
    _check_psk_args(n_states, alpha)
    if alpha == 0.0:
        return 0.0
    log_lam = _log_residue_masses(n_states, alpha)
    log_terms = 1.5 * np.roll(log_lam, 1) - 0.5 * log_lam
    return float(2.0 * alpha * alpha * np.exp(logsumexp(log_terms)))


def gaussian_correlation(va: float) -> float:
    if va < 0:
        raise ValueError(f"modulation variance must be >= 0, got {va}")
    V = va + 1.0
    return math.sqrt(V * V - 1.0)


def source_covariance(scheme: ModulationScheme) -> SourceCovariance:
    V = scheme.V
    if scheme.kind is Kind.GAUSSIAN:
        z = gaussian_correlation(scheme.va)
    else:
        z = correlation_Z(scheme.n_states, scheme.alpha)
    return SourceCovariance(V, V, z)
