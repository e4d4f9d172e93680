import json

import pytest

import cli


def _load(path):
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def test_symfun_run_writes_report(tmp_path, capsys):
    output = tmp_path / 'symfun.json'
    assert cli.main(['verify-symfun', '--output', str(output)]) == cli.EXIT_PASS
    document = _load(output)
    assert document['summary'] == {'total': 1, 'passed': 1, 'failed': 0}
    assert document['records'][0]['metadata']['job'] == 'symfun_oracle'
    assert 'verify-symfun: 1/1 passed' in capsys.readouterr().out


def test_ambient_run_on_horoball(tmp_path):
    output = tmp_path / 'ambient.json'
    assert cli.main(['verify-ambient', '--model', 'horoball', '--n', '2', '--output', str(output)]) == 0
    assert _load(output)['records'][0]['model'] == 'hyperbolic-upper-half-space'


def test_minkowski_run_on_one_cap(tmp_path):
    output = tmp_path / 'minkowski.json'
    argv = ['verify-minkowski', '--model', 'euclid', '--n', '2', '--theta', '1.0472',
            '--res', '12,16', '--r', '0', '--output', str(output)]
    assert cli.main(argv) == 0
    record = _load(output)['records'][0]
    assert record['identity'] == 'minkowski'
    assert record['resolutions'] == [12, 16]


def test_config_file_with_flag_override(tmp_path):
    config_path = tmp_path / 'run.json'
    config_path.write_text(json.dumps({
        'model': 'horoball', 'n': 3, 'r': [0], 'theta': [1.0472], 'res': [12, 16],
        'tolerance': {'minkowski': 1e-6},
    }), encoding='utf-8')
    output = tmp_path / 'out.json'
    argv = ['verify-minkowski', '--config', str(config_path), '--n', '2', '--output', str(output)]
    assert cli.main(argv) == 0
    document = _load(output)
    assert document['config']['dimensions'] == [2]
    assert document['config']['tolerances'] == {'minkowski': 1e-6}
    assert document['records'][0]['model'] == 'hyperbolic-upper-half-space'


@pytest.mark.parametrize('argv', [
    [],
    ['verify-minkowski', '--res', ''],
    ['verify-minkowski', '--res', '32,16'],
    ['verify-symfun', '--tolerance', 'bogus=1'],
    ['verify-symfun', '--tolerance', 'symfun_oracle'],
    ['verify-minkowski', '--scenario', 'sphere:n=2'],
    ['verify-nothing'],
])
def test_usage_errors_exit_with_two(argv, capsys):
    assert cli.main(argv) == cli.EXIT_USAGE


def test_unreadable_config_file(tmp_path):
    missing = tmp_path / 'missing.json'
    assert cli.main(['verify-symfun', '--config', str(missing)]) == cli.EXIT_USAGE
    listing = tmp_path / 'list.json'
    listing.write_text('[1, 2]', encoding='utf-8')
    assert cli.main(['verify-symfun', '--config', str(listing)]) == cli.EXIT_USAGE


def test_unwritable_report_fails_the_run(tmp_path):
    blocker = tmp_path / 'blocker'
    blocker.write_text('', encoding='utf-8')
    output = blocker / 'symfun.json'
    assert cli.main(['verify-symfun', '--output', str(output)]) == cli.EXIT_FAIL


def test_tolerance_pairs_merge_with_config_file(tmp_path):
    config_path = tmp_path / 'run.json'
    config_path.write_text(json.dumps({'tolerances': {'minkowski': 1e-6}}), encoding='utf-8')
    args = cli.build_parser().parse_args(
        ['verify-minkowski', '--config', str(config_path), '--tolerance', 'jacobi=1e-5'])
    run_config = cli.build_run_config(args)
    assert run_config.tolerances == {'minkowski': 1e-6, 'jacobi': 1e-5}


def test_all_runs_are_byte_identical(tmp_path):
    first, second = tmp_path / 'first.json', tmp_path / 'second.json'
    argv = ['all', '--model', 'euclid', '--n', '2', '--theta', '1.5708', '--r', '0',
            '--res', '12,16', '--basis-size', '6']
    cli.main(argv + ['--output', str(first)])
    cli.main(argv + ['--output', str(second)])
    assert first.read_bytes() == second.read_bytes()
    assert _load(first)['subcommand'] == 'all'


def test_reports_list_and_clear(tmp_path, capsys):
    report_dir = tmp_path / 'reports'
    assert cli.main(['verify-symfun', '--output', str(report_dir / 'symfun.json')]) == cli.EXIT_PASS
    capsys.readouterr()

    assert cli.main(['reports', 'list', '--report-dir', str(report_dir)]) == cli.EXIT_PASS
    out = capsys.readouterr().out
    assert 'symfun.json: verify-symfun - 1/1 passed' in out
    assert '1 report(s), 1/1 records passed' in out

    assert cli.main(['reports', 'clear', '--report-dir', str(report_dir)]) == cli.EXIT_PASS
    assert not (report_dir / 'symfun.json').exists()
    assert 'cleared 1 report(s)' in capsys.readouterr().out


def test_reports_clear_by_name(tmp_path):
    report_dir = tmp_path / 'reports'
    cli.main(['verify-symfun', '--output', str(report_dir / 'symfun.json')])
    argv = ['reports', 'clear', '--name', 'symfun', '--report-dir', str(report_dir)]
    assert cli.main(argv) == cli.EXIT_PASS
    assert not (report_dir / 'symfun.json').exists()
