import logging
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fgnarx.design import optimal_transformed_input
from fgnarx.exceptions import DimensionError, InadmissibleError
from fgnarx.gaussian_sim import stream
from fgnarx.innovations import build_innovation_system
from fgnarx.laplace import (chain_covariance, laplace_exact, laplace_limit, laplace_mc,
                            phi_chain_laplace_closed, phi_chain_laplace_eigen, riccati_trace,
                            spectral_gap)
from fgnarx.noise import NoiseModel


@pytest.fixture(scope='module')
def fgn_system_200():
    return build_innovation_system(NoiseModel.fgn(0.6), 200, kernels=False)


def test_zero_mu_is_exactly_one(fgn_system_200):
    v = optimal_transformed_input(fgn_system_200, 200, 0.5)
    assert laplace_exact(0.5, 0.0, fgn_system_200, v) == 1.0
    assert laplace_exact(0.5, 0.0, fgn_system_200, v, part='determinant') == 1.0
    assert laplace_mc(0.5, 0.0, fgn_system_200, v, 200, 1000, stream(0)) == (1.0, 0.0)


@pytest.mark.parametrize('design', ['zero', 'optimal'])
def test_exact_matches_monte_carlo(fgn_system_200, design):
    if design == 'zero':
        v = np.zeros(200)
    else:
        v = optimal_transformed_input(fgn_system_200, 200, 0.5)
    exact = laplace_exact(0.5, 1.0, fgn_system_200, v, n=200)
    mean, se = laplace_mc(0.5, 1.0, fgn_system_200, v, 200, 50_000, stream(23))
    assert abs(exact - mean) < 3 * se


def test_exact_matches_monte_carlo_white(white):
    system = build_innovation_system(white, 100, kernels=False)
    v = optimal_transformed_input(system, 100, -0.4)
    exact = laplace_exact(-0.4, 2.0, system, v)
    mean, se = laplace_mc(-0.4, 2.0, system, v, 100, 50_000, stream(24))
    assert abs(exact - mean) < 3 * se


def test_transform_decreases_in_mu(fgn_system_200):
    v = optimal_transformed_input(fgn_system_200, 200, 0.5)
    one = laplace_mc(0.5, 1.0, fgn_system_200, v, 200, 2000, stream(3))[0]
    two = laplace_mc(0.5, 2.0, fgn_system_200, v, 200, 2000, stream(3))[0]
    assert two < one < 1.0
    assert (laplace_exact(0.5, 2.0, fgn_system_200, v)
            < laplace_exact(0.5, 1.0, fgn_system_200, v) < 1.0)


def test_input_lowers_the_transform(fgn_system_200):
    v = optimal_transformed_input(fgn_system_200, 200, 0.5)
    with_input = laplace_exact(0.5, 1.0, fgn_system_200, v)
    without = laplace_exact(0.5, 1.0, fgn_system_200, np.zeros(200))
    assert with_input < without
    assert_allclose(laplace_exact(0.5, 1.0, fgn_system_200, v, part='determinant'), without,
                    rtol=1e-12)


@pytest.mark.parametrize('theta', [0.4, 0.7])
def test_convergence_to_limit(fgn06, theta):
    full_gaps, det_gaps = [], []
    for n in (500, 1000, 2000, 4000):
        system = build_innovation_system(fgn06, n, kernels=False)
        v = optimal_transformed_input(system, n, theta)
        trace = riccati_trace(theta, 1.0, system, v)
        full_gaps.append(abs(trace.value - laplace_limit(theta, 1.0)))
        det_gaps.append(abs(trace.determinant_part - laplace_limit(theta, 1.0, 'determinant')))
    assert full_gaps[-1] < full_gaps[0]
    assert det_gaps[-1] < det_gaps[0]
    assert det_gaps[-1] / laplace_limit(theta, 1.0, 'determinant') < 0.05


def test_riccati_trace_shape_and_positivity(fgn_system_200):
    v = optimal_transformed_input(fgn_system_200, 200, 0.7)
    trace = riccati_trace(0.7, 1.0, fgn_system_200, v)
    assert trace.gamma_diag.shape == (199, 2, 2)
    assert trace.z.shape == (199, 2)
    assert_allclose(trace.gamma_diag, np.swapaxes(trace.gamma_diag, 1, 2))
    assert np.min(np.linalg.eigvalsh(trace.gamma_diag)) > -1e-12
    assert np.all(np.diff(trace.log_det) > 0)
    assert trace.exponent > 0
    assert_allclose(trace.m[0], [v[0], 0.0])


def test_negative_mu_beyond_gap(fgn06):
    system = build_innovation_system(fgn06, 50, kernels=False)
    with pytest.raises(InadmissibleError, match='not invertible at step 1'):
        laplace_exact(0.5, -1e6, system, np.zeros(50))


def test_inadmissible_step_is_logged(fgn06, caplog):
    system = build_innovation_system(fgn06, 50, kernels=False)
    with caplog.at_level(logging.DEBUG, logger='fgnarx.laplace'):
        with pytest.raises(InadmissibleError):
            riccati_trace(0.5, -1e6, system, np.zeros(50))
    assert 'determinant factor' in caplog.text
    assert 'at step 1' in caplog.text


def test_unknown_part(fgn_system_200):
    with pytest.raises(InadmissibleError):
        laplace_exact(0.5, 1.0, fgn_system_200, np.zeros(200), part='noise')


def test_length_mismatch(fgn_system_200):
    with pytest.raises(DimensionError):
        laplace_exact(0.5, 1.0, fgn_system_200, np.zeros(200), n=100)


def test_monte_carlo_needs_replications(fgn_system_200):
    with pytest.raises(InadmissibleError):
        laplace_mc(0.5, 1.0, fgn_system_200, np.zeros(200), 200, 999, stream(0))


def test_limits():
    assert laplace_limit(0.7, 2.0) == pytest.approx(math.exp(-13.0719), rel=1e-4)
    assert laplace_limit(0.5, 1.0, 'determinant') == pytest.approx(math.exp(-2.0 / 3.0))


def test_chain_covariance_small():
    assert_allclose(chain_covariance(0.5, 2), [[1.0]])
    assert_allclose(chain_covariance(0.5, 3), [[1.25, 0.5], [0.5, 1.0]])
    with pytest.raises(DimensionError):
        chain_covariance(0.5, 1)


@pytest.mark.parametrize('theta', [0.3, 0.5, 0.7])
@pytest.mark.parametrize('shift', ['negative', 'zero', 'positive'])
@pytest.mark.parametrize('n', [5, 20, 50])
def test_chain_closed_form_matches_eigenvalues(theta, shift, n):
    a = {'negative': -(1.0 - theta) ** 2 + 0.01, 'zero': 0.0, 'positive': 0.5}[shift]
    closed = phi_chain_laplace_closed(theta, a, n)
    assert closed == pytest.approx(phi_chain_laplace_eigen(theta, a, n), rel=1e-8)


def test_chain_with_vanishing_theta():
    assert phi_chain_laplace_eigen(1e-8, 0.3, 5) == pytest.approx(1.3 ** -2, rel=1e-12)
    assert phi_chain_laplace_closed(1e-8, 0.3, 5) == pytest.approx(1.3 ** -2, rel=1e-12)


def test_chain_at_zero_shift():
    assert phi_chain_laplace_closed(0.5, 0.0, 30) == 1.0
    assert phi_chain_laplace_eigen(0.5, 0.0, 30) == 1.0


def test_chain_near_gap_is_finite():
    value = phi_chain_laplace_closed(0.5, -0.24, 50)
    assert math.isfinite(value) and value > 1.0


def test_chain_beyond_gap():
    with pytest.raises(InadmissibleError):
        phi_chain_laplace_closed(0.5, -1.0, 50)
    with pytest.raises(InadmissibleError):
        phi_chain_laplace_eigen(0.5, -1.0, 50)


def test_chain_eigen_limit():
    with pytest.raises(DimensionError):
        phi_chain_laplace_eigen(0.5, 0.1, 401)


@pytest.mark.parametrize('theta', [0.3, 0.5, 0.7])
def test_spectral_gap_grows_below_bound(theta):
    gaps = [spectral_gap(theta, n) for n in (2, 5, 10, 25, 50, 100, 200, 400)]
    assert gaps[0] == pytest.approx(1.0)
    assert np.all(np.diff(gaps) > -1e-12)
    assert gaps[-1] < 1.0 / (1.0 - theta) ** 2


def test_spectral_gap_without_memory():
    assert spectral_gap(1e-8, 10) == pytest.approx(1.0, abs=1e-6)


def test_spectral_gap_is_logged(caplog):
    with caplog.at_level(logging.DEBUG, logger='fgnarx.laplace'):
        nu = spectral_gap(0.5, 10)
    assert f'nu1={nu:.6g}' in caplog.text


@pytest.mark.slow
@pytest.mark.parametrize('theta', [0.3, 0.5, 0.7])
def test_spectral_gap_full_sweep(theta):
    gaps = np.array([spectral_gap(theta, n) for n in range(2, 401)])
    assert np.all(np.diff(gaps) > -1e-12)
    assert np.all(gaps < 1.0 / (1.0 - theta) ** 2)
