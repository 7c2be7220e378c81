"""Brute-force reference computations in a truncated number basis.

Everything here is built from explicit state vectors and matrices, without
using the series or closed forms in :mod:`pskqkd.modulation`, so the two can
be checked against each other. Not used on the sweep path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, pdtrc

from .errors import TruncationError

TAIL_TOL = 1e-15


@dataclass(frozen=True)
class FockState:
    amplitudes: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.amplitudes) - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: FockState) -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class FockOperator:
    entries: np.ndarray
    hermitian: bool = False

    @property
    def n_max(self) -> int:
        return self.entries.shape[0] - 1


@dataclass(frozen=True)
class TwoModeState:
    """sum_{mn} c_mn |m>|n>; rows index the first mode."""

    amplitudes: np.ndarray

    @property
    def n_max(self) -> int:
        return self.amplitudes.shape[0] - 1

    def reduced(self, mode: int) -> np.ndarray:
        c = self.amplitudes
        if mode == 0:
            return c @ c.conj().T
        return c.T @ c.conj()


def truncation_level(alpha: float) -> int:
    x = alpha * alpha
    return max(32, math.ceil(x + 10.0 * math.sqrt(x) + 20.0))


def _check_tail(mean_photons: float, n_max: int):
    tail = float(pdtrc(n_max, mean_photons)) if mean_photons > 0 else 0.0
    if tail >= TAIL_TOL:
        raise TruncationError(
            f"n_max={n_max} drops Poisson({mean_photons:.4g}) mass {tail:.2e} >= {TAIL_TOL:g}")


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


def coherent_fock(beta: complex, n_max: int) -> FockState:
    """c_n = exp(-|beta|^2/2) beta^n / sqrt(n!), with factorials in log space."""
    beta = complex(beta)
    r = abs(beta)
    _check_tail(r * r, n_max)
    n = np.arange(n_max + 1)
    if r == 0.0:
        amps = (n == 0).astype(complex)
    else:
        log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
        amps = np.exp(log_mag) * np.exp(1j * n * np.angle(beta))
    return FockState(amps)


def mixture_density(n_states: int, alpha: float, n_max: int) -> FockOperator:
    """Equal-weight mixture of the n_states coherent states alpha*exp(2 pi i k / N)."""
    rho = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for k in range(n_states):
        v = coherent_fock(alpha * np.exp(2j * np.pi * k / n_states), n_max).amplitudes
        rho += np.outer(v, v.conj())
    rho /= n_states
    return FockOperator(0.5 * (rho + rho.conj().T), hermitian=True)


def _class_vector(k, n_states, alpha, n_max):
    """Unnormalized projection of |alpha> onto Fock levels = k (mod N)."""
    amps = coherent_fock(alpha, n_max).amplitudes.real
    n = np.arange(n_max + 1)
    return np.where(n % n_states == k, amps, 0.0)


def phi_state(k: int, n_states: int, alpha: float, n_max: int) -> FockState:
    if not 0 <= k < n_states:
        raise ValueError(f"k must lie in [0, {n_states}), got {k}")
    v = _class_vector(k, n_states, alpha, n_max)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError(f"phi_{k} is undefined at alpha = {alpha} (zero weight)")
    return FockState((v / norm).astype(complex))


def class_weights(n_states: int, alpha: float, n_max: int) -> np.ndarray:
    """Squared norms of the residue-class projections of |alpha>."""
    return np.array([np.sum(_class_vector(k, n_states, alpha, n_max) ** 2) for k in range(n_states)])


def oracle_spectrum(n_states: int, alpha: float, n_max: int) -> np.ndarray:
    """Eigenvalues of the mixture density matrix, assigned to residue classes.

    Each analytic phi_k picks the eigenvector it overlaps most; classes with
    zero weight (alpha = 0) get eigenvalue 0.
    """
    rho = mixture_density(n_states, alpha, n_max).entries
    w, u = np.linalg.eigh(rho)
    out = np.zeros(n_states)
    for k in range(n_states):
        try:
            phi = phi_state(k, n_states, alpha, n_max).amplitudes
        except ValueError:
            continue
        overlaps = np.abs(u.conj().T @ phi)
        out[k] = w[int(np.argmax(overlaps))]
    return out


def purification(alpha: float, n_max: int, n_states: int = 8) -> TwoModeState:
    """sum_k sqrt(lambda_k) |phi_k>|phi_k>, lambda_k taken from the truncated vectors."""
    c = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for k in range(n_states):
        v = _class_vector(k, n_states, alpha, n_max)
        lam = float(np.sum(v * v))
        if lam == 0.0:
            continue
        phi = v / math.sqrt(lam)
        c += math.sqrt(lam) * np.outer(phi, phi)
    return TwoModeState(c)


def psi_measurement_states(alpha: float, n_max: int, n_states: int = 8) -> list[FockState]:
    """Alice's projective basis psi_k = N^(-1/2) sum_m exp(2 pi i k m / N) |phi_m>.

    Projecting the first mode of the purification onto psi_k leaves the
    second mode in the coherent state alpha*exp(-2 pi i k / N), with
    probability 1/N.
    """
    phis = [phi_state(m, n_states, alpha, n_max).amplitudes for m in range(n_states)]
    states = []
    for k in range(n_states):
        amps = sum(np.exp(2j * np.pi * k * m / n_states) * phis[m] for m in range(n_states))
        states.append(FockState(amps / math.sqrt(n_states)))
    return states


def paired_amplitude(k: int, alpha: float, n_states: int = 8) -> complex:
    """Coherent amplitude left on Bob's mode when Alice finds psi_k."""
    return alpha * np.exp(-2j * np.pi * k / n_states)


def project_first_mode(state: TwoModeState, outcome: FockState) -> tuple[float, FockState]:
    """Probability of ``outcome`` on mode 0 and the normalized state left on mode 1."""
    residual = outcome.amplitudes.conj() @ state.amplitudes
    prob = float(np.vdot(residual, residual).real)
    if prob == 0.0:
        return 0.0, FockState(residual)
    return prob, FockState(residual / math.sqrt(prob))


def fidelity(a: FockState, b: FockState) -> float:
    return abs(a.inner(b)) ** 2


def numeric_correlation(state: TwoModeState) -> float:
    """<ab + a^dag b^dag> evaluated with truncated ladder matrices."""
    a = annihilation(state.n_max)
    c = state.amplitudes
    ab = np.vdot(c, a @ c @ a.T)  # <psi| a (x) b |psi>
    return float(2.0 * ab.real)


def numeric_quadrature_variance(state: TwoModeState, mode: int) -> float:
    """<2 n + 1> on one mode, i.e. the diagonal covariance entry."""
    n = np.arange(state.n_max + 1)
    rho = state.reduced(mode)
    return float(2.0 * np.real(np.sum(n * np.diag(rho))) + 1.0)


def two_mode_squeezed(variance: float, n_max: int) -> TwoModeState:
    """Two-mode squeezed vacuum with cosh(2r) = variance, so Z = sqrt(V^2 - 1)."""
    r = 0.5 * math.acosh(variance)
    lam = math.tanh(r)
    if lam ** (2 * (n_max + 1)) >= TAIL_TOL:
        raise TruncationError(f"n_max={n_max} too small for squeezed variance {variance}")
    c = np.diag(lam ** np.arange(n_max + 1) / math.cosh(r)).astype(complex)
    return TwoModeState(c)
