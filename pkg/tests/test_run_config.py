import math

import pytest

from models.run_config import RunConfig
from utils.errors import UsageError


def test_defaults_follow_the_testing_config():
    run = RunConfig.defaults('verify-minkowski')
    assert run.models == ['euclid', 'horoball']
    assert run.dimensions == [2, 3]
    assert run.resolutions == [12, 16, 24]
    assert run.thetas == pytest.approx([math.pi / 3, math.pi / 2, 2 * math.pi / 3])
    assert run.orders_for(3) == [0, 1, 2]


def test_mapping_with_aliases():
    run = RunConfig.from_mapping('stability', {
        'model': 'horoball', 'n': '3', 'r': '0,2', 'theta': [1.0], 'lambda': 3,
        'res': '12,16', 'tolerance': {'eigenvalue': 1e-4}, 'basis_size': 6,
    })
    assert run.models == ['horoball']
    assert run.dimensions == [3]
    assert run.orders_for(3) == [0, 2]
    assert run.orders_for(2) == [0]
    assert run.curvature_for('horoball') == 3.0
    assert run.tolerances == {'eigenvalue': 1e-4}
    assert run.basis_size == 6


def test_curvature_defaults_per_model():
    run = RunConfig.defaults('all')
    assert run.curvature_for('euclid') == 1.0
    assert run.curvature_for('horoball') == 2.0


def test_scenario_strings_are_kept_whole():
    run = RunConfig.from_mapping('first-variation', {'scenario': 'euclid-cap:n=2,lambda=1,theta=1'})
    assert run.scenarios == ['euclid-cap:n=2,lambda=1,theta=1']
    assert run.scenario.complete


@pytest.mark.parametrize('values', [
    {'res': ''},
    {'res': '16,12'},
    {'res': '4,8'},
    {'model': 'sphere'},
    {'n': '5'},
    {'r': '3'},
    {'theta': '0'},
    {'theta': '3.2'},
    {'tolerance': {'made_up': 1e-3}},
    {'tolerance': {'minkowski': -1.0}},
    {'basis_size': 0},
    {'colour': 'blue'},
    {'n': 'two'},
    {'scenario': 'sphere:n=2'},
])
def test_invalid_mappings(values):
    with pytest.raises(UsageError):
        RunConfig.from_mapping('verify-minkowski', values)


def test_unknown_subcommand():
    with pytest.raises(UsageError):
        RunConfig.from_mapping('verify-everything', {})


def test_to_dict_drops_output():
    run = RunConfig.from_mapping('verify-symfun', {'output': 'out.json'})
    assert run.output == 'out.json'
    assert 'output' not in run.to_dict()
    assert run.to_dict()['subcommand'] == 'verify-symfun'
