"""Covariance-matrix utilities for Gaussian modes in (x1, p1, x2, p2, ...) ordering."""

from __future__ import annotations

import math

import numpy as np

from .errors import PhysicalityError

SYMMETRY_TOL = 1e-9


def omega(n_modes: int) -> np.ndarray:
    """Symplectic form for n_modes, block diagonal in [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def epr_covariance(variance: float) -> np.ndarray:
    """Two-mode squeezed vacuum with single-mode variance ``variance``."""
    if variance < 1.0:
        raise PhysicalityError(f"EPR variance must be >= 1, got {variance}")
    c = math.sqrt(variance * variance - 1.0)
    sz = np.diag([1.0, -1.0])
    return np.block([[variance * np.eye(2), c * sz], [c * sz, variance * np.eye(2)]])


def beamsplitter(transmittance: float) -> np.ndarray:
    """4x4 symplectic of a beam splitter; output mode 1 = sqrt(t) in1 + sqrt(1-t) in2."""
    t = math.sqrt(transmittance)
    r = math.sqrt(1.0 - transmittance)
    eye = np.eye(2)
    return np.block([[t * eye, r * eye], [-r * eye, t * eye]])


def embed(two_mode: np.ndarray, first_mode: int, n_modes: int) -> np.ndarray:
    """Identity on n_modes except for a 4x4 block acting on (first_mode, first_mode+1)."""
    out = np.eye(2 * n_modes)
    i = 2 * first_mode
    out[i:i + 4, i:i + 4] = two_mode
    return out


def reorder_modes(gamma: np.ndarray, order) -> np.ndarray:
    idx = [2 * m + q for m in order for q in (0, 1)]
    return gamma[np.ix_(idx, idx)]


def symplectic_eigenvalues_2mode(gamma: np.ndarray) -> tuple[float, float]:
    """Two-mode spectrum from the block invariants.

    delta = det A + det B + 2 det C and D = det(gamma); the eigenvalues are
    sqrt((delta +- sqrt(delta^2 - 4 D)) / 2), largest first. Near a degenerate
    spectrum the discriminant cancels, so accuracy there is about sqrt(eps).
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {gamma.shape}")
    a, b, c = gamma[:2, :2], gamma[2:, 2:], gamma[:2, 2:]
    delta = np.linalg.det(a) + np.linalg.det(b) + 2.0 * np.linalg.det(c)
    det = np.linalg.det(gamma)
    disc = delta * delta - 4.0 * det
    if disc < 0.0:
        if disc < -1e-9 * delta * delta:
            raise PhysicalityError(f"negative discriminant {disc:.3e} in two-mode spectrum")
        disc = 0.0
    root = math.sqrt(disc)
    nu1 = math.sqrt(0.5 * (delta + root))
    nu2 = math.sqrt(max(0.5 * (delta - root), 0.0))
    if nu2 < 1.0 - 1e-6:
        raise PhysicalityError(f"symplectic eigenvalue {nu2} < 1")
    return nu1, nu2


def symplectic_eigenvalues(gamma: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of any positive-definite covariance matrix, descending.

    Uses K = gamma^(1/2) Omega gamma^(1/2), which is real antisymmetric, so iK
    is Hermitian with eigenvalues +-nu_k. Only symmetric/Hermitian
    eigensolvers are involved.
    """
    gamma = np.asarray(gamma, dtype=float)
    dim = gamma.shape[0]
    if gamma.ndim != 2 or dim != gamma.shape[1] or dim % 2:
        raise ValueError(f"expected a square matrix of even size, got shape {gamma.shape}")
    scale = max(1.0, float(np.max(np.abs(gamma))))
    if np.max(np.abs(gamma - gamma.T)) > SYMMETRY_TOL * scale:
        raise ValueError("covariance matrix is not symmetric")
    gamma = 0.5 * (gamma + gamma.T)

    w, u = np.linalg.eigh(gamma)
    if w[0] <= 0.0:
        raise PhysicalityError(f"covariance matrix is not positive definite (min eigenvalue {w[0]})")
    root = (u * np.sqrt(w)) @ u.T
    k = root @ omega(dim // 2) @ root
    nu = np.linalg.eigvalsh(1j * k)
    return np.sort(nu)[::-1][: dim // 2].copy()


def condition_on_measurement(gamma: np.ndarray, measured_mode: int, heterodyne: bool) -> np.ndarray:
    """Covariance of the remaining modes after measuring ``measured_mode``.

    Homodyne measures x and uses the pseudo-inverse of diag(gamma_xx, 0),
    which is diag(1/gamma_xx, 0). Heterodyne uses (gamma_B + I)^-1.
    """
    n = gamma.shape[0] // 2
    keep = [m for m in range(n) if m != measured_mode]
    g = reorder_modes(gamma, keep + [measured_mode])
    rest, meas, cross = g[:-2, :-2], g[-2:, -2:], g[:-2, -2:]
    if heterodyne:
        h = np.linalg.inv(meas + np.eye(2))
    else:
        assert meas[0, 0] > 0.0, "homodyne on a mode with vanishing x variance"
        h = np.diag([1.0 / meas[0, 0], 0.0])
    out = rest - cross @ h @ cross.T
    return 0.5 * (out + out.T)
