import json
import logging

import pandas as pd
import pytest

from fgnarx.cli import main
from fgnarx.config import ExperimentConfig, save_config
from fgnarx.noise import NoiseModel


def run_json(capsys, *argv):
    assert main(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def test_fisher_single_step(capsys):
    result = run_json(capsys, 'fisher', '--theta', '0.7', '--noise', 'white', '--n', '1',
                      '--input', 'zero')
    assert result['fisher'] == 0.0
    assert result['asymptotic_fisher'] == pytest.approx(13.0719, abs=1e-4)


def test_fisher_with_monte_carlo(capsys):
    result = run_json(capsys, 'fisher', '--theta', '0.5', '--n', '200', '--reps', '2000',
                      '--seed', '3')
    assert result['noise'] == {'kind': 'fgn', 'hurst': 0.6}
    assert result['fisher'] == pytest.approx(result['fisher_noise_part']
                                             + result['fisher_input_part'])
    assert abs(result['fisher_empirical'] - result['fisher']) < 4 * result['fisher_empirical_se']


def test_fisher_reps_need_seed(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(['fisher', '--theta', '0.5', '--n', '20', '--reps', '200'])
    assert excinfo.value.code == 2
    assert '--seed is required' in capsys.readouterr().err


def test_bad_hurst_is_a_domain_error(capsys, tmp_path):
    code = main(['estimate', '--hurst', '1.5', '--input', str(tmp_path / 'traj.csv')])
    assert code == 1
    assert 'hurst must lie in (0,1)' in capsys.readouterr().err


def test_bad_theta_is_a_domain_error(capsys):
    assert main(['spectral-gap', '--theta', '1.2', '--n', '10']) == 1
    assert 'theta must lie in (-1,1)' in capsys.readouterr().err


def test_domain_error_traceback_is_logged(capsys, caplog):
    with caplog.at_level(logging.DEBUG, logger='fgnarx.cli'):
        assert main(['spectral-gap', '--theta', '1.2', '--n', '10', '-vv']) == 1
    assert 'spectral-gap failed' in caplog.text
    assert 'Traceback' in caplog.text


def test_unknown_flag_is_a_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(['fisher', '--theta', '0.5', '--n', '10', '--bogus'])
    assert excinfo.value.code == 2


def test_simulate_needs_seed():
    with pytest.raises(SystemExit) as excinfo:
        main(['simulate', '--theta', '0.5', '--n', '10'])
    assert excinfo.value.code == 2


def test_simulate_then_estimate(capsys, tmp_path):
    path = tmp_path / 'traj.csv'
    simulated = run_json(capsys, 'simulate', '--theta', '0.4', '--n', '300', '--seed', '11',
                         '--out', str(path))
    assert simulated['energy'] == pytest.approx(1.0, abs=1e-12)
    estimated = run_json(capsys, 'estimate', '--input', str(path), '--true-theta', '0.4')
    assert estimated['theta_hat'] == simulated['estimate']['theta_hat']
    assert estimated['phi'] == simulated['estimate']['phi']


def test_simulate_noise(capsys, tmp_path):
    result = run_json(capsys, 'simulate-noise', '--n', '16', '--seed', '1')
    assert len(result['xi']) == 16
    dense = run_json(capsys, 'simulate-noise', '--n', '16', '--seed', '1', '--dense',
                     '--out', str(tmp_path / 'xi.csv'))
    assert len(pd.read_csv(dense['path'])) == 16


def test_innovations(capsys):
    result = run_json(capsys, 'innovations', '--noise', 'ar1', '--phi', '0.6', '--n', '6')
    assert result['beta'][0] == pytest.approx(0.6)
    assert len(result['sigma']) == 7


def test_design_input(capsys):
    result = run_json(capsys, 'design-input', '--noise', 'white', '--n', '5')
    assert result['u'] == pytest.approx([1.0] * 5)
    assert result['sign_profile'] == 'plus'
    alternating = run_json(capsys, 'design-input', '--noise', 'white', '--n', '4',
                           '--theta', '-0.5', '--alternate-start', 'odd')
    assert alternating['u'] == pytest.approx([1.0, -1.0, 1.0, -1.0])


def test_laplace_check_chain(capsys):
    result = run_json(capsys, 'laplace-check', '--theta', '0.5', '--n', '10', '--a', '0.2')
    assert result['chain_closed_form'] == pytest.approx(result['chain_eigen'], rel=1e-10)


def test_laplace_check_transform(capsys, tmp_path):
    result = run_json(capsys, 'laplace-check', '--theta', '0.5', '--noise', 'white',
                      '--n', '50', '--mu', '1', '--seed', '2', '--reps', '2000',
                      '--out', str(tmp_path / 'riccati.csv'))
    assert abs(result['exact'] - result['monte_carlo']) < 4 * result['monte_carlo_se']
    assert len(pd.read_csv(result['path'])) == 49


def test_laplace_check_needs_an_argument():
    with pytest.raises(SystemExit) as excinfo:
        main(['laplace-check', '--theta', '0.5', '--n', '10'])
    assert excinfo.value.code == 2


def test_spectral_gap(capsys):
    result = run_json(capsys, 'spectral-gap', '--theta', '0.5', '--n', '50')
    assert result['below_bound'] is True
    assert result['bound'] == pytest.approx(4.0)
    negative = run_json(capsys, 'spectral-gap', '--theta', '-0.5', '--n', '50')
    assert 'bound' not in negative


def test_experiment(capsys, tmp_path):
    config = ExperimentConfig(thetas=[0.4], n=60, replications=30, noise=NoiseModel.white(),
                              output_dir=str(tmp_path / 'unused'))
    path = save_config(config, tmp_path / 'exp.json')
    result = run_json(capsys, 'experiment', '--config', str(path), '--jobs', '1',
                      '--out', str(tmp_path / 'results'), '--seed', '9')
    assert result['report']['seed'] == 9
    assert (tmp_path / 'results' / 'report.json').is_file()
    assert not (tmp_path / 'unused').exists()
