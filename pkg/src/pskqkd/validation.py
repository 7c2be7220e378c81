"""Cross-checks between the analytic routes and their independent references."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fock_oracle as fo
from .channel import Detection, DetectorParams, LinkParams, noise_budget
from .keyrate import (
    Path,
    conditional_spectrum_closed,
    conditional_spectrum_matrix,
    printed_heterodyne_coefficients,
    secret_key_rate,
)
from .modulation import correlation_Z, psk8_eigenvalues_closed, psk_eigenvalues, source_covariance
from .sweep import make_scheme

ALPHA_SQUARED = (0.125, 0.5, 1.0, 2.0)
GRID_L = tuple(range(0, 151, 10))
GRID_EPS = (0.005, 0.01, 0.02)
GRID_VA = (0.25, 0.5, 1.0)
GRID_PROTOCOLS = ("psk4", "psk8", "gaussian")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_spectra(tol=1e-10) -> CheckResult:
    worst = 0.0
    for a2 in ALPHA_SQUARED:
        alpha = math.sqrt(a2)
        series = psk_eigenvalues(8, alpha).lambdas
        closed = psk8_eigenvalues_closed(alpha).lambdas
        oracle = fo.oracle_spectrum(8, alpha, fo.truncation_level(alpha))
        worst = max(worst, np.max(np.abs(series - closed)), np.max(np.abs(series - oracle)))
    return CheckResult("spectrum: closed vs series vs Fock", worst < tol, f"max dev {worst:.2e}")


def check_purification(tol=1e-10) -> CheckResult:
    worst = 0.0
    for a2 in ALPHA_SQUARED:
        alpha = math.sqrt(a2)
        n_max = fo.truncation_level(alpha)
        psi = fo.purification(alpha, n_max)
        rho = fo.mixture_density(8, alpha, n_max).entries
        worst = max(worst, np.linalg.norm(psi.reduced(1) - rho), np.linalg.norm(psi.reduced(0) - rho))
        states = fo.psi_measurement_states(alpha, n_max)
        gram = np.array([[a.inner(b) for b in states] for a in states])
        worst = max(worst, np.max(np.abs(gram - np.eye(8))))
        for k, s in enumerate(states):
            prob, cond = fo.project_first_mode(psi, s)
            target = fo.coherent_fock(fo.paired_amplitude(k, alpha), n_max)
            worst = max(worst, abs(prob - 0.125), 1.0 - fo.fidelity(cond, target))
    return CheckResult("purification: marginals, basis, projections", worst < tol, f"max dev {worst:.2e}")


def check_correlation(tol=1e-9) -> CheckResult:
    worst = 0.0
    for a2 in ALPHA_SQUARED:
        alpha = math.sqrt(a2)
        psi = fo.purification(alpha, fo.truncation_level(alpha))
        worst = max(worst, abs(fo.numeric_correlation(psi) - correlation_Z(8, alpha)))
    tmsv = fo.two_mode_squeezed(2.0, 64)
    worst = max(worst, abs(fo.numeric_correlation(tmsv) - math.sqrt(3.0)))
    return CheckResult("correlation: Fock expectation vs series", worst < tol, f"max dev {worst:.2e}")


def _grid():
    for protocol in GRID_PROTOCOLS:
        for va in GRID_VA:
            src = source_covariance(make_scheme(protocol, va))
            for eps in GRID_EPS:
                for L in GRID_L:
                    yield protocol, va, src, LinkParams(L, eps)


def check_paths(mode: Detection, tol=1e-8) -> CheckResult:
    det = DetectorParams(mode)
    worst, worst_unit = 0.0, 0.0
    for _, _, src, link in _grid():
        budget = noise_budget(link, det)
        closed = conditional_spectrum_closed(src, budget)
        matrix = conditional_spectrum_matrix(src, budget)
        worst = max(worst, max(abs(a - b) for a, b in zip(closed[:2], matrix[:2])))
        worst_unit = max(worst_unit, abs(matrix[2] - 1.0))
    ok = worst < tol and worst_unit < 1e-6
    return CheckResult(f"paths ({mode.value}): closed vs matrix", ok,
                       f"max dev {worst:.2e}, |nu_5 - 1| <= {worst_unit:.2e}")


def check_physicality(tol=1e-9) -> CheckResult:
    lowest = math.inf
    for mode in Detection:
        det = DetectorParams(mode)
        for protocol, va, _, link in _grid():
            for path in Path:
                rep = secret_key_rate(make_scheme(protocol, va), link, det, 0.8, path)
                lowest = min(lowest, min(rep.symplectic_spectrum))
    return CheckResult("physicality: all nu >= 1", lowest >= 1.0 - tol, f"min nu {lowest:.12f}")


def probe_printed_heterodyne() -> CheckResult:
    """Informational: the alternative heterodyne coefficients have no real spectrum."""
    det = DetectorParams(Detection.HETERODYNE)
    discs = []
    for _, _, src, link in _grid():
        A, B = printed_heterodyne_coefficients(src, noise_budget(link, det))
        discs.append(A * A - 4.0 * B)
    n_bad = sum(d < 0 for d in discs)
    return CheckResult("probe: chi_hom/2TZ heterodyne variant", True,
                       f"{n_bad}/{len(discs)} grid points with negative discriminant (info only)")


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_spectra,
    check_purification,
    check_correlation,
    lambda: check_paths(Detection.HOMODYNE),
    lambda: check_paths(Detection.HETERODYNE),
    check_physicality,
    probe_printed_heterodyne,
)


def run_all() -> list[CheckResult]:
    return [check() for check in CHECKS]
