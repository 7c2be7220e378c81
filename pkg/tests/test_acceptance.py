"""Acceptance gate: one PASS/FAIL line per criterion, each at its stated tolerance."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from pskqkd import fock_oracle as fo
from pskqkd.channel import Detection, DetectorParams, LinkParams, noise_budget, simulate_quadratures
from pskqkd.keyrate import Path, secret_key_rate
from pskqkd.modulation import correlation_Z, gaussian_correlation, psk8_eigenvalues_closed, psk_eigenvalues
from pskqkd.sweep import SweepConfig, make_scheme, render_csv, run_sweep, zero_crossings
from pskqkd.validation import check_paths, check_physicality

ALPHA_SQUARED = (0.125, 0.5, 1.0, 2.0)


def report(number, title, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  [{number}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def test_1_spectrum_equivalence():
    start = time.perf_counter()
    worst, widest = 0.0, 0
    for a2 in ALPHA_SQUARED:
        alpha = math.sqrt(a2)
        n_max = min(fo.truncation_level(alpha), 64)
        widest = max(widest, n_max)
        series = psk_eigenvalues(8, alpha).lambdas
        closed = psk8_eigenvalues_closed(alpha).lambdas
        oracle = fo.oracle_spectrum(8, alpha, n_max)
        worst = max(worst, np.abs(series - closed).max(), np.abs(series - oracle).max(),
                    np.abs(closed - oracle).max())
    elapsed = time.perf_counter() - start
    report(1, "spectrum equivalence", worst < 1e-10 and elapsed < 5 and widest <= 64,
           f"max dev {worst:.1e}, n_max {widest}, {elapsed:.2f} s")


def test_2_purification():
    trace_dev, gram_dev, prob_dev = 0.0, 0.0, 0.0
    for a2 in ALPHA_SQUARED:
        alpha = math.sqrt(a2)
        n_max = fo.truncation_level(alpha)
        psi = fo.purification(alpha, n_max)
        rho = fo.mixture_density(8, alpha, n_max).entries
        trace_dev = max(trace_dev, np.linalg.norm(psi.reduced(1) - rho))
        states = fo.psi_measurement_states(alpha, n_max)
        gram = np.array([[a.inner(b) for b in states] for a in states])
        gram_dev = max(gram_dev, np.abs(gram - np.eye(8)).max())
        for s in states:
            prob_dev = max(prob_dev, abs(fo.project_first_mode(psi, s)[0] - 1 / 8))
    report(2, "purification", max(trace_dev, gram_dev, prob_dev) < 1e-10,
           f"partial trace {trace_dev:.1e}, Gram {gram_dev:.1e}, probabilities {prob_dev:.1e}")


def test_3_correlation():
    numeric_dev = 0.0
    for a2 in ALPHA_SQUARED:
        alpha = math.sqrt(a2)
        psi = fo.purification(alpha, fo.truncation_level(alpha))
        numeric_dev = max(numeric_dev, abs(fo.numeric_correlation(psi) - correlation_Z(8, alpha)))
    grid = (0.1, 0.25, 0.5, 1.0, 2.0, 3.0)
    ordered = all(correlation_Z(4, math.sqrt(v / 2)) < correlation_Z(8, math.sqrt(v / 2)) < gaussian_correlation(v)
                  for v in grid)
    ratios = {v: correlation_Z(8, math.sqrt(v / 2)) / gaussian_correlation(v) for v in grid if v <= 1}
    close = all(r > 0.98 for r in ratios.values())
    report(3, "correlation", numeric_dev < 1e-9 and ordered and close,
           f"Fock vs series {numeric_dev:.1e}, ordering {'ok' if ordered else 'broken'}, "
           f"Z8/ZG = " + ", ".join(f"{r:.4f}@{v:g}" for v, r in ratios.items()) + " (need > 0.98)")


def test_4_path_equivalence():
    hom = check_paths(Detection.HOMODYNE)
    het = check_paths(Detection.HETERODYNE)
    report(4, "path equivalence", hom.passed and het.passed,
           f"homodyne {hom.detail}; heterodyne {het.detail}")


def test_5_physicality():
    grid = check_physicality()
    # only the Gaussian covariance is pure; the PSK ones carry Z < Z_G and are mixed
    pure_dev = 0.0
    for mode in Detection:
        for path in Path:
            rep = secret_key_rate(make_scheme("gaussian", 1.0), LinkParams(0.0, 0.0),
                                  DetectorParams(mode, 1.0, 0.0), 0.8, path)
            pure_dev = max(pure_dev, max(abs(v - 1.0) for v in rep.symplectic_spectrum))
    report(5, "physicality", grid.passed and pure_dev < 1e-9,
           f"{grid.detail}, pure-limit deviation {pure_dev:.1e}")


def _crossing(rows, eps):
    (z,) = [z for z in zero_crossings(rows) if z.epsilon == eps]
    return z.distance_km if z.status == "crossed" else (math.inf if z.status == "positive_to_end" else 0.0)


def test_6_reference_point_claims():
    start = time.perf_counter()
    rows = {}
    for protocol in ("psk8", "psk4"):
        for detection in ("homodyne", "heterodyne"):
            rows[protocol, detection] = run_sweep(SweepConfig.from_mapping(
                {"protocol": protocol, "detection": detection}))
    elapsed = time.perf_counter() - start

    (at_100,) = [r for r in rows["psk8", "homodyne"] if r.epsilon == 0.005 and r.length_km == 100.0]
    positive_100 = at_100.delta_i > 0
    eps_list = (0.005, 0.01, 0.02)
    d8 = [_crossing(rows["psk8", "homodyne"], e) for e in eps_list]
    decreasing = d8[0] > d8[1] > d8[2]
    dominance = all(_crossing(rows["psk8", det], e) >= _crossing(rows["psk4", det], e)
                    for det in ("homodyne", "heterodyne") for e in eps_list)
    report(6, "reference-point claims", positive_100 and decreasing and dominance and elapsed < 60,
           f"delta_I(100 km) = {at_100.delta_i:.6f} (need > 0); crossings "
           + "/".join(f"{d:.1f}" for d in d8) + f" km {'decreasing' if decreasing else 'not decreasing'}; "
           f"8-state >= 4-state {'yes' if dominance else 'no'}; {elapsed:.1f} s")


MC_GRID = [
    ("gaussian", Detection.HOMODYNE, 0.0, 0.005),
    ("gaussian", Detection.HETERODYNE, 50.0, 0.02),
    ("psk8", Detection.HOMODYNE, 20.0, 0.01),
    ("psk8", Detection.HETERODYNE, 100.0, 0.005),
    ("psk4", Detection.HOMODYNE, 75.0, 0.02),
    ("psk4", Detection.HETERODYNE, 10.0, 0.01),
]


def test_7_monte_carlo():
    worst = 0.0
    for i, (protocol, mode, length, eps) in enumerate(MC_GRID):
        link, det = LinkParams(length, eps), DetectorParams(mode)
        b = noise_budget(link, det)
        scale = det.efficiency * b.transmittance
        s = simulate_quadratures(make_scheme(protocol, 1.0), link, det, 100_000, seed=i)
        worst = max(worst,
                    abs(s.v_b - scale * (2.0 + b.chi_total)) / s.se_v_b,
                    abs(s.v_b_given_a - scale * (1.0 + b.chi_total)) / s.se_v_b_given_a)
    report(7, "Monte-Carlo variances", worst < 5.0, f"worst deviation {worst:.2f} standard errors")


def test_8_determinism():
    config = SweepConfig.from_mapping({"protocol": "psk8", "detection": "heterodyne",
                                       "va": "optimize", "distance_step": "25"})
    first = render_csv(run_sweep(config), config)
    second = render_csv(run_sweep(config), config)
    threaded = render_csv(run_sweep(config, workers=4), config)
    report(8, "determinism", first == second == threaded,
           f"{len(first.encode())} bytes, runs identical: {first == second}, 1 vs 4 threads identical: "
           f"{first == threaded}")
