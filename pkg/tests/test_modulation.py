import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pskqkd import fock_oracle as fo
from pskqkd.modulation import (
    Kind,
    ModulationScheme,
    correlation_Z,
    gaussian_correlation,
    psk8_eigenvalues_closed,
    psk_eigenvalues,
    source_covariance,
)

# residue-class Poisson sums at alpha^2 = 0.5, evaluated with mpmath at 40 digits
LAMBDA_8_HALF = [
    0.606530718474052, 0.30326533312084, 0.0758163326273053, 0.0126360554180992,
    0.00157950692664412, 0.000157950692645388, 1.31625577198828e-5, 9.40182694261168e-7,
]
# 2 a^2 sum lambda_{k-1}^{3/2} / lambda_k^{1/2} at alpha^2 = 0.5, mpmath, 40 digits;
# the Fock-space expectation reproduces both (see test_fock_oracle)
Z8_VA1 = 1.6913374126717241
Z4_VA1 = 1.6554190361611755


def test_vacuum_spectrum():
    lam = psk_eigenvalues(8, 0.0).lambdas
    assert lam[0] == 1.0
    assert np.all(lam[1:] == 0.0)


def test_spectrum_at_half():
    lam = psk_eigenvalues(8, math.sqrt(0.5)).lambdas
    np.testing.assert_allclose(lam, LAMBDA_8_HALF, rtol=1e-13, atol=1e-16)


def test_four_state_normalized():
    lam = psk_eigenvalues(4, 1.0).lambdas
    assert abs(lam.sum() - 1.0) < 1e-12
    assert np.all(lam > 0)


@pytest.mark.parametrize("bad", [(8, -0.1), (1, 0.5), (8, math.nan)])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        psk_eigenvalues(*bad)


def test_closed_form_at_zero():
    lam = psk8_eigenvalues_closed(0.0).lambdas
    assert lam[0] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.abs(lam[1:]) < 1e-15)


@pytest.mark.parametrize("a2", [0.0, 0.125, 0.5, 1.0, 2.0, 3.0, 4.0])
def test_closed_form_matches_series(a2):
    alpha = math.sqrt(a2)
    np.testing.assert_allclose(psk8_eigenvalues_closed(alpha).lambdas,
                               psk_eigenvalues(8, alpha).lambdas, rtol=0, atol=1e-11)


def test_closed_form_trace():
    assert abs(psk8_eigenvalues_closed(math.sqrt(2.0)).lambdas.sum() - 1.0) < 1e-12


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(0.0, 3.0), n=st.sampled_from([4, 8]))
def test_trace_property(alpha, n):
    lam = psk_eigenvalues(n, alpha).lambdas
    assert abs(lam.sum() - 1.0) < 1e-12
    assert np.all(lam >= 0)
    if alpha > 1e-3:  # below this the smallest classes underflow
        assert np.all(lam > 0)


def test_large_amplitude_series_converges():
    # alpha^2 = 25: terms rise for a while before they fall
    lam = psk_eigenvalues(8, 5.0).lambdas
    assert abs(lam.sum() - 1.0) < 1e-12
    np.testing.assert_allclose(lam, psk8_eigenvalues_closed(5.0).lambdas, rtol=0, atol=1e-12)


def test_correlation_values():
    alpha = math.sqrt(0.5)
    assert correlation_Z(8, 0.0) == 0.0
    assert correlation_Z(8, alpha) == pytest.approx(Z8_VA1, rel=1e-13)
    assert correlation_Z(4, alpha) == pytest.approx(Z4_VA1, rel=1e-13)
    assert correlation_Z(4, alpha) < correlation_Z(8, alpha) < math.sqrt(3.0)


def test_correlation_tiny_amplitude_has_no_nan():
    z = correlation_Z(8, 1e-200)
    assert math.isfinite(z) and z >= 0


def test_eight_state_close_to_gaussian_only_at_small_variance():
    # the ratio is 0.996 at V_A = 0.1 but 0.9765 at V_A = 1
    ratios = {va: correlation_Z(8, math.sqrt(va / 2)) / gaussian_correlation(va) for va in (0.1, 0.5, 1.0)}
    assert ratios[0.1] > 0.995
    assert ratios[1.0] == pytest.approx(Z8_VA1 / math.sqrt(3.0), rel=1e-12)
    assert ratios[0.1] > ratios[0.5] > ratios[1.0]


def test_gaussian_correlation():
    assert gaussian_correlation(0.0) == 0.0
    assert gaussian_correlation(1.0) == pytest.approx(math.sqrt(3.0), rel=1e-15)
    assert gaussian_correlation(3.0) == pytest.approx(math.sqrt(15.0), rel=1e-15)


@settings(max_examples=40, deadline=None)
@given(va=st.floats(1e-3, 3.0))
def test_correlation_ordering(va):
    alpha = math.sqrt(va / 2)
    z4, z8, zg = correlation_Z(4, alpha), correlation_Z(8, alpha), gaussian_correlation(va)
    assert 0 < z4 < z8 < zg


def test_correlation_monotone_in_alpha():
    alphas = np.linspace(0.0, math.sqrt(2.0), 200)
    for n in (4, 8):
        z = [correlation_Z(n, a) for a in alphas]
        assert np.all(np.diff(z) > 0)


@pytest.mark.parametrize("scheme", [
    ModulationScheme.gaussian(1.0),
    ModulationScheme.gaussian(0.0),
    ModulationScheme.psk(8, 0.0),
    ModulationScheme.psk(8, math.sqrt(0.5)),
    ModulationScheme.psk_from_variance(4, 2.5),
])
def test_physicality(scheme):
    src = source_covariance(scheme)
    assert src.x * src.x - src.z * src.z >= 1.0 - 1e-10


def test_source_covariance_entries():
    g = source_covariance(ModulationScheme.gaussian(1.0))
    assert (g.x, g.y) == (2.0, 2.0) and g.z == pytest.approx(math.sqrt(3.0))
    vac = source_covariance(ModulationScheme.psk(8, 0.0))
    assert (vac.x, vac.y, vac.z) == (1.0, 1.0, 0.0)
    p8 = source_covariance(ModulationScheme.psk_from_variance(8, 1.0))
    assert p8.x == pytest.approx(2.0) and p8.z == pytest.approx(Z8_VA1, rel=1e-13)


def test_scheme_invariants():
    s = ModulationScheme.psk(8, 0.7)
    assert s.va == pytest.approx(2 * 0.49)
    assert s.V == pytest.approx(s.va + 1)
    assert s.kind is Kind.PSK and s.label == "psk8"
    assert ModulationScheme.gaussian(1.0).label == "gaussian"
    with pytest.raises(ValueError):
        ModulationScheme.psk(1, 0.5)
    with pytest.raises(ValueError):
        ModulationScheme.gaussian(-1.0)


def test_matrix_form():
    m = source_covariance(ModulationScheme.gaussian(1.0)).matrix()
    assert m.shape == (4, 4)
    np.testing.assert_allclose(m, m.T)
    assert m[0, 2] == pytest.approx(math.sqrt(3.0)) and m[1, 3] == pytest.approx(-math.sqrt(3.0))


def test_series_against_fock_eigendecomposition():
    alpha = math.sqrt(0.5)
    np.testing.assert_allclose(fo.oracle_spectrum(4, alpha, 48), psk_eigenvalues(4, alpha).lambdas,
                               rtol=0, atol=1e-10)
