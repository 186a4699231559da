import json
import logging

import pytest

from fgnarx.config import (ExperimentConfig, ExperimentFile, InputKind, build_design,
                           load_config, parse_input, save_config, theta_tag)
from fgnarx.design import SignProfile, optimal_input
from fgnarx.exceptions import ExperimentError, FormatError, InadmissibleError
from fgnarx.formats import save_design
from fgnarx.innovations import build_innovation_system
from fgnarx.noise import NoiseModel


def test_full_scale_defaults():
    config = ExperimentConfig()
    assert config.thetas == [0.4, 0.7, -0.4, -0.7]
    assert config.n == 2500
    assert config.replications == 5000
    assert config.noise == NoiseModel.fgn(0.6)
    assert config.input == 'optimal'


def test_round_trip(tmp_path):
    config = ExperimentConfig(thetas=[0.5], n=100, replications=10,
                              noise=NoiseModel.ar1(0.3), bins=20, seed=7)
    path = save_config(config, tmp_path / 'exp.json')
    data = json.loads(path.read_text())
    assert data['version'] == ExperimentFile.CONFIG_VERSION
    assert data['settings']['noise'] == {'kind': 'ar1', 'phi': 0.3}
    assert load_config(path) == config


def test_bare_settings(tmp_path):
    path = tmp_path / 'bare.json'
    path.write_text(json.dumps({'thetas': [0.4], 'n': 50, 'replications': 4,
                                'noise': {'kind': 'fgn', 'hurst': 0.7}}))
    config = load_config(path)
    assert config.noise == NoiseModel.fgn(0.7)
    assert config.seed == ExperimentConfig().seed


def test_version_mismatch_warns(tmp_path, caplog):
    path = tmp_path / 'old.json'
    path.write_text(json.dumps({'version': '0.9', 'settings': {'n': 50}}))
    with caplog.at_level(logging.WARNING, logger='fgnarx.config'):
        config = load_config(path)
    assert config.n == 50
    assert 'version mismatch' in caplog.text


@pytest.mark.parametrize('settings, message', [
    ({'thetas': [1.0]}, 'theta must lie in'),
    ({'thetas': []}, 'thetas must not be empty'),
    ({'n': 1}, 'n must be an integer'),
    ({'replications': 1}, 'replications must be'),
    ({'seed': -1}, 'seed must be'),
    ({'input': 'random'}, 'input must be'),
    ({'bins': 'magic'}, 'unknown binning rule'),
    ({'alternate_start': 'late'}, 'alternate_start'),
    ({'noise': {'kind': 'fgn', 'hurst': 1.5}}, r'noise: hurst must lie in \(0,1\)'),
    ({'reps': 10}, 'unknown settings: reps'),
])
def test_invalid_settings(settings, message):
    with pytest.raises(ExperimentError, match=message):
        ExperimentConfig.from_dict(settings)


def test_unreadable_file(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{')
    with pytest.raises(FormatError):
        load_config(path)
    with pytest.raises(FormatError, match='not found'):
        load_config(tmp_path / 'absent.json')


@pytest.mark.parametrize('spec, kind', [
    ('optimal', InputKind.OPTIMAL),
    ('zero', InputKind.ZERO),
    ('file:u.csv', InputKind.FILE),
])
def test_parse_input(spec, kind):
    assert parse_input(spec) is kind


def test_parse_input_needs_path():
    with pytest.raises(ExperimentError):
        parse_input('file:')


def test_build_design(tmp_path, fgn06):
    system = build_innovation_system(fgn06, 40)
    assert build_design('optimal', system, 40, -0.4).sign_profile is SignProfile.ALTERNATING
    assert build_design('zero', system, 40, 0.4).energy == 0.0

    path = save_design(optimal_input(system, 40, 0.4), tmp_path / 'u.csv')
    custom = build_design(f'file:{path}', system, 40, 0.4)
    assert custom.sign_profile is SignProfile.CUSTOM
    assert custom.energy == pytest.approx(1.0, abs=1e-12)


def test_build_design_rejects_energetic_file(tmp_path, fgn06):
    system = build_innovation_system(fgn06, 40)
    design = optimal_input(system, 40, 0.4)
    path = tmp_path / 'u.csv'
    path.write_text('u\n' + '\n'.join(repr(float(u)) for u in 1.01 * design.u) + '\n')
    with pytest.raises(InadmissibleError):
        build_design(f'file:{path}', system, 40, 0.4)


@pytest.mark.parametrize('theta, tag', [(0.4, '0.4'), (-0.7, '-0.7'), (0.0, '0')])
def test_theta_tag(theta, tag):
    assert theta_tag(theta) == tag
