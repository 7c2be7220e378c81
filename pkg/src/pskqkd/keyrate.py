"""Reverse-reconciliation key rate under collective attacks.

The Holevo bound is computed from two symplectic spectra: that of the
Alice/Bob state after the channel, and that of Alice plus the detector-noise
modes after Bob's measurement. Both spectra are available through a
closed-form route and through an explicit covariance-matrix route.
"""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from . import symplectic
from .channel import Detection, DetectorParams, LinkParams, NoiseBudget, noise_budget
from .errors import PhysicalityError
from .modulation import ModulationScheme, SourceCovariance, source_covariance

NU_FLOOR = 1.0 - 1e-6


class Path(str, enum.Enum):
    CLOSED_FORM = "closed"
    MATRIX = "matrix"


def holevo_G(x: float) -> float:
    """(x+1) log2(x+1) - x log2(x), the entropy of a thermal state with mean photon number x."""
    if x < 0.0:
        if x < -1e-12:
            raise ValueError(f"holevo_G needs x >= 0, got {x}")
        x = 0.0
    if x == 0.0:
        return 0.0
    return (x + 1.0) * math.log2(x + 1.0) - x * math.log2(x)


def thermal_entropy(nu: float) -> float:
    """von Neumann entropy (bits) of a mode with symplectic eigenvalue nu."""
    if nu < NU_FLOOR:
        raise PhysicalityError(f"symplectic eigenvalue {nu} < 1")
    return holevo_G(max(nu - 1.0, 0.0) / 2.0)


def channel_output_covariance(src: SourceCovariance, budget: NoiseBudget) -> np.ndarray:
    """Alice/Bob covariance after the channel: [[V I, sqrt(T) Z sz], [., T (V + chi_line) I]]."""
    T = budget.transmittance
    sz = np.diag([1.0, -1.0])
    c = math.sqrt(T) * src.z * sz
    return np.block([
        [src.x * np.eye(2), c],
        [c, T * (src.y + budget.chi_line) * np.eye(2)],
    ])


def channel_spectrum_closed(src: SourceCovariance, budget: NoiseBudget) -> tuple[float, float]:
    """Spectrum of the standard-form channel output, largest first.

    Uses delta^2 - 4D = (a - b)^2 ((a + b)^2 - 4 c^2), which stays accurate
    where the generic invariant formula cancels (pure states, nu = 1, 1).
    """
    T = budget.transmittance
    a = src.x
    b = T * (src.y + budget.chi_line)
    c2 = T * src.z * src.z
    s2 = (a + b) ** 2 - 4.0 * c2
    if s2 < 0.0:
        raise PhysicalityError(f"channel covariance violates the uncertainty principle ((a+b)^2 - 4c^2 = {s2:.3e})")
    s, d = math.sqrt(s2), abs(a - b)
    return 0.5 * (s + d), 0.5 * (s - d)


def _invariants(src, budget):
    """(delta, sqrt(D)) of the channel-output matrix, in closed form."""
    T = budget.transmittance
    a = src.x
    b = T * (src.y + budget.chi_line)
    c2 = T * src.z * src.z
    delta = a * a + b * b - 2.0 * c2
    sqrt_d = abs(a * b - c2)
    return delta, sqrt_d


# A^2 - 4B carries rounding noise of a few ulp of A^2; below that it is zero
_DISC_NOISE = 64.0 * sys.float_info.epsilon


def _pair_from_trace_det(A, B):
    disc = A * A - 4.0 * B
    if abs(disc) <= _DISC_NOISE * A * A:
        disc = 0.0
    if disc < 0.0:
        if disc < -1e-9 * A * A:
            raise PhysicalityError(f"negative discriminant {disc:.3e}: parameters are not physical")
        disc = 0.0
    root = math.sqrt(disc)
    return math.sqrt(0.5 * (A + root)), math.sqrt(max(0.5 * (A - root), 0.0))


def conditional_spectrum_closed(src: SourceCovariance, budget: NoiseBudget) -> tuple[float, float, float]:
    """Spectrum of Alice + detector modes after Bob's measurement, in closed form.

    The third eigenvalue is exactly 1. The heterodyne form uses chi_het and
    a 2 T Z^2 term; it agrees with :func:`conditional_spectrum_matrix`.
    """
    T = budget.transmittance
    V = src.x
    chi = budget.chi_det
    delta, sqrt_d = _invariants(src, budget)
    b_line = T * (V + budget.chi_line)
    denom = T * (V + budget.chi_total)
    if budget.mode is Detection.HOMODYNE:
        A = (delta * chi + V * sqrt_d + b_line) / denom
        B = sqrt_d * (V + sqrt_d * chi) / denom
    else:
        A = (delta * chi * chi + sqrt_d * sqrt_d + 1.0
             + 2.0 * chi * (V * sqrt_d + b_line) + 2.0 * T * src.z * src.z) / denom**2
        # nu3 - nu4 = sqrt(A - 2 sqrt(B)), whose numerator is a perfect square
        root_b = (V + sqrt_d * chi) / denom
        total = math.sqrt(A + 2.0 * root_b)
        gap = abs((V - b_line) * chi + sqrt_d - 1.0) / denom
        if gap > total:
            raise PhysicalityError(f"conditional spectrum below 1: nu3 + nu4 = {total}, nu3 - nu4 = {gap}")
        return 0.5 * (total + gap), 0.5 * (total - gap), 1.0
    nu3, nu4 = _pair_from_trace_det(A, B)
    return nu3, nu4, 1.0


def printed_heterodyne_coefficients(src: SourceCovariance, budget: NoiseBudget) -> tuple[float, float]:
    """(A, B) of the heterodyne formula with chi_hom and 2 T Z inside the bracket.

    Only used to document how far that variant is from the matrix route;
    it generally yields A^2 < 4B, i.e. no real spectrum.
    """
    if budget.mode is not Detection.HETERODYNE:
        raise ValueError("heterodyne budget required")
    eta, v_el = budget.efficiency, budget.electronic_noise
    chi_hom = ((1.0 - eta) + v_el) / eta
    T, V = budget.transmittance, src.x
    delta, sqrt_d = _invariants(src, budget)
    denom = T * (V + budget.chi_total)
    A = (delta * chi_hom**2 + sqrt_d**2 + 1.0
         + 2.0 * chi_hom * (V * sqrt_d + T * (V + budget.chi_line) + 2.0 * T * src.z)) / denom**2
    B = ((V + sqrt_d * budget.chi_det) / denom) ** 2
    return A, B


def detector_model_covariance(src: SourceCovariance, budget: NoiseBudget) -> np.ndarray:
    """Four-mode covariance (A, B, F, G) after the detector beam splitter.

    Bob's inefficiency is a beam splitter of transmittance eta mixing the
    channel output B1 with one half F0 of an EPR pair (A, B1, F0, G).
    """
    if budget.epr_variance is None:
        raise ValueError("beam-splitter detector model needs efficiency < 1")
    gamma = block_diag(channel_output_covariance(src, budget),
                       symplectic.epr_covariance(budget.epr_variance))
    s = symplectic.embed(symplectic.beamsplitter(budget.efficiency), 1, 4)
    return s @ gamma @ s.T


def conditional_spectrum_matrix(src: SourceCovariance, budget: NoiseBudget) -> tuple[float, float, float]:
    heterodyne = budget.mode is Detection.HETERODYNE
    if budget.epr_variance is None:
        # perfect detector: measure B1 directly; F and G are absent, i.e. vacuum
        if budget.electronic_noise > 0.0:
            raise PhysicalityError(
                "matrix route undefined for efficiency 1 with electronic noise (EPR variance diverges)")
        cond = symplectic.condition_on_measurement(channel_output_covariance(src, budget), 1, heterodyne)
        nu = [*symplectic.symplectic_eigenvalues(cond), 1.0, 1.0]
    else:
        cond = symplectic.condition_on_measurement(detector_model_covariance(src, budget), 1, heterodyne)
        nu = symplectic.symplectic_eigenvalues(cond)
    nu = sorted((float(v) for v in nu), reverse=True)
    if nu[-1] < NU_FLOOR:
        raise PhysicalityError(f"conditional symplectic eigenvalue {nu[-1]} < 1")
    return tuple(nu)


def mutual_information(src: SourceCovariance, budget: NoiseBudget) -> float:
    """Alice-Bob Shannon information in bits per use; heterodyne counts both quadratures."""
    chi_t = budget.chi_total
    info = 0.5 * math.log2((src.x + chi_t) / (1.0 + chi_t))
    if budget.mode is Detection.HETERODYNE:
        info *= 2.0
    return info


@dataclass(frozen=True)
class KeyRateReport:
    i_ab: float
    chi_be: float
    delta_i: float
    nu_channel: tuple[float, float]
    nu_conditional: tuple[float, float, float]
    path: Path
    beta: float
    scheme: ModulationScheme
    link: LinkParams
    detector: DetectorParams
    source: SourceCovariance
    budget: NoiseBudget
    # closed-form conditional spectrum kept next to a matrix-route result
    audit_conditional_closed: tuple[float, float, float] | None = None

    @property
    def delta_i_clamped(self) -> float:
        return max(0.0, self.delta_i)

    @property
    def symplectic_spectrum(self) -> tuple[float, ...]:
        return (*self.nu_channel, *self.nu_conditional)


def secret_key_rate(scheme: ModulationScheme, link: LinkParams, det: DetectorParams,
                    beta: float = 0.8, path: Path | str = Path.CLOSED_FORM) -> KeyRateReport:
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"reconciliation efficiency must lie in [0, 1], got {beta}")
    path = Path(path)
    src = source_covariance(scheme)
    budget = noise_budget(link, det)
    gamma = channel_output_covariance(src, budget)

    audit = None
    if path is Path.CLOSED_FORM:
        nu_ch = channel_spectrum_closed(src, budget)
        nu_cond = conditional_spectrum_closed(src, budget)
    else:
        nu_ch = tuple(float(v) for v in symplectic.symplectic_eigenvalues(gamma))
        nu_cond = conditional_spectrum_matrix(src, budget)
        try:
            audit = conditional_spectrum_closed(src, budget)
        except PhysicalityError:
            audit = None
    if min(nu_ch) < NU_FLOOR:
        raise PhysicalityError(f"channel symplectic eigenvalue {min(nu_ch)} < 1")

    i_ab = mutual_information(src, budget)
    chi_be = sum(thermal_entropy(v) for v in nu_ch) - sum(thermal_entropy(v) for v in nu_cond)
    return KeyRateReport(
        i_ab=i_ab,
        chi_be=chi_be,
        delta_i=beta * i_ab - chi_be,
        nu_channel=tuple(nu_ch),
        nu_conditional=tuple(nu_cond),
        path=path,
        beta=beta,
        scheme=scheme,
        link=link,
        detector=det,
        source=src,
        budget=budget,
        audit_conditional_closed=audit,
    )
