import json

import numpy as np
import pytest

from app.models import Connection, Sign
from app.repositories import manifests_repository, trajectories_repository
from app.services import evolution_service, spectral_service
from app.storage import read_csv, run_session
from app.utils.cli import finish_run
from app.utils.experiment_config import ExperimentConfig


def _invoke(runner, cli, command, config, out, *extra):
    return runner.invoke(cli, [command, '--config', str(config), '--out', str(out), *extra])


def _manifest(out):
    return json.loads((out / 'manifest.json').read_text(encoding='utf-8'))


def test_commands_are_registered(cli):
    assert sorted(cli.commands) == ['connect', 'equilibria', 'evolve', 'omega', 'pullback', 'report']


def test_equilibria_skips_bifurcation_value(runner, cli, write_config, tmp_path):
    config = write_config('lambda=0.5,4\nforcing.beta0=1.0\n')
    out = tmp_path / 'eq'
    result = _invoke(runner, cli, 'equilibria', config, out)
    assert result.exit_code == 0, result.output
    manifest = _manifest(out)
    assert manifest['passed']
    assert manifest['summary']['counts'] == {'0.5': 1}
    assert len(manifest['errors']) == 1
    assert manifest['errors'][0]['error'] == 'BifurcationValueError'
    assert (out / 'equilibria' / 'lambda_0.5' / 'phi_0.csv').exists()
    manifests_repository.verify_manifest(out)


def test_equilibria_writes_profiles(runner, cli, write_config, tmp_path):
    config = write_config('lambda=2\nforcing.beta0=1.0\n')
    out = tmp_path / 'eq'
    result = _invoke(runner, cli, 'equilibria', config, out)
    assert result.exit_code == 0, result.output
    directory = out / 'equilibria' / 'lambda_2'
    assert sorted(p.name for p in directory.glob('*.csv')) == ['phi_0.csv', 'phi_1_minus.csv', 'phi_1_plus.csv']
    header, rows = read_csv(out / 'equilibria' / 'summary.csv')
    assert header[:2] == ['lambda', 'label']
    assert len(rows) == 3
    assert _manifest(out)['certification']['residual_lambda_2']


@pytest.mark.slow
def test_equilibria_census(runner, cli, write_config, tmp_path):
    config = write_config('lambda=0.5,2,5,10\nforcing.beta0=1.0\nn_modes=255\n')
    out = tmp_path / 'eq'
    result = _invoke(runner, cli, 'equilibria', config, out)
    assert result.exit_code == 0, result.output
    manifest = _manifest(out)
    assert manifest['summary']['counts'] == {'0.5': 1, '2': 3, '5': 5, '10': 7}
    assert manifest['passed']
    for key in ('0.5', '2', '5', '10'):
        for check in ('residual', 'zeros', 'glue'):
            assert manifest['certification'][f'{check}_lambda_{key}'], check


def test_bad_config_exits_with_code_2(runner, cli, write_config, tmp_path):
    config = write_config('lambda=2\nforcing.kind=sawtooth\n')
    out = tmp_path / 'bad'
    result = _invoke(runner, cli, 'evolve', config, out)
    assert result.exit_code == 2
    error = json.loads((out / 'error.json').read_text(encoding='utf-8'))
    assert error['error'] == 'ConfigError'
    assert error['exit_code'] == 2


def test_missing_config_file(runner, cli, tmp_path):
    result = _invoke(runner, cli, 'equilibria', tmp_path / 'nada.env', tmp_path / 'out')
    assert result.exit_code == 2


def test_evolve_certifies_process(runner, cli, write_config, tmp_path):
    config = write_config('lambda=2\nforcing.kind=constant\nforcing.beta0=1.0\nevolve.end=4\n')
    out = tmp_path / 'ev'
    result = _invoke(runner, cli, 'evolve', config, out)
    assert result.exit_code == 0, result.output
    manifest = _manifest(out)
    assert set(manifest['certification']) == {'composition_lambda_2', 'positivity_lambda_2', 'sandwich_lambda_2'}
    directory = out / 'evolve' / 'lambda_2'
    for name in ('trajectory/meta.json', 'trajectory/snapshots.csv', 'norms.csv', 'laps.csv'):
        assert (directory / name).exists()
    _, laps = read_csv(directory / 'laps.csv')
    assert {row[1] for row in laps} == {'3'}
    assert (out / 'config.env').exists()


def test_evolve_antisymmetric_data(runner, cli, write_config, tmp_path):
    config = write_config('lambda=2\nforcing.kind=sinusoidal\nforcing.beta0=2\nforcing.amplitude=0.5\n'
                          'evolve.u0_modes=2:0.5\nevolve.end=3\n')
    out = tmp_path / 'ev'
    result = _invoke(runner, cli, 'evolve', config, out)
    assert result.exit_code == 0, result.output
    assert _manifest(out)['certification']['antisymmetry_lambda_2']


def test_evolve_rejects_modes_outside_grid(runner, cli, write_config, tmp_path):
    config = write_config('lambda=2\nevolve.u0_modes=100:1.0\n')
    result = _invoke(runner, cli, 'evolve', config, tmp_path / 'ev')
    assert result.exit_code == 2


def test_pullback_with_constant_forcing(runner, cli, write_config, tmp_path):
    config = write_config('lambda=2\nforcing.beta0=1.0\npullback.modes=1\npullback.signs=+\n'
                          'pullback.window=0,2\npullback.section=1.0\n')
    out = tmp_path / 'pb'
    result = _invoke(runner, cli, 'pullback', config, out, '--threads', '2')
    assert result.exit_code == 0, result.output
    manifest = _manifest(out)
    assert manifest['certification']['constant_xi_1_plus_lambda_2']
    assert (out / 'pullback' / 'lambda_2' / 'xi_1_plus' / 'convergence.csv').exists()
    header, _ = read_csv(out / 'attractor' / 'lambda_2' / 'section.csv')
    assert header == ['x', 'zero', 'xi_1_plus', 'xi_1_minus']


def test_pullback_non_convergence_exit_code(runner, cli, write_config, tmp_path):
    config = write_config('lambda=2\nforcing.kind=sinusoidal\nforcing.beta0=2\nforcing.amplitude=0.5\n'
                          'pullback.modes=1\npullback.signs=+\npullback.window=0,1\npullback.max_extensions=1\n')
    out = tmp_path / 'pb'
    result = _invoke(runner, cli, 'pullback', config, out)
    assert result.exit_code == 3
    error = json.loads((out / 'error.json').read_text(encoding='utf-8'))
    assert error['error'] == 'NonConvergence'
    assert error['history'] == []


def test_omega_census(runner, cli, write_config, tmp_path):
    config = write_config('lambda=2\nforcing.beta0=1.0\nomega.samples=3\nomega.horizon=40\n')
    out = tmp_path / 'om'
    result = _invoke(runner, cli, 'omega', config, out, '--seed', '7')
    assert result.exit_code == 0, result.output
    manifest = _manifest(out)
    assert manifest['config']['seed'] == '7'
    assert sum(manifest['summary']['census'].values()) == 3
    assert set(manifest['summary']['census']) <= {'F_1_plus', 'F_1_minus'}
    header, rows = read_csv(out / 'omega' / 'lambda_2' / 'census.csv')
    assert header[0] == 'run' and len(rows) == 3
    assert {row[9] for row in rows} <= {'xi_1_plus', 'xi_1_minus'}


def test_omega_census_of_antisymmetric_data(runner, cli, write_config, tmp_path):
    config = write_config('lambda=5\nforcing.kind=sinusoidal\nforcing.beta0=2.0\nforcing.amplitude=0.5\n'
                          'omega.samples=4\nomega.antisymmetric=true\n')
    out = tmp_path / 'om'
    result = _invoke(runner, cli, 'omega', config, out, '--seed', '11')
    assert result.exit_code == 0, result.output
    manifest = _manifest(out)
    assert manifest['summary']['antisymmetric']
    assert sum(manifest['summary']['census'].values()) == 4
    assert set(manifest['summary']['census']) <= {'F_2_plus', 'F_2_minus', 'zero'}
    assert manifest['certification']['census_lambda_5']
    assert manifest['certification']['no_mixed_lambda_5']
    _, rows = read_csv(out / 'omega' / 'lambda_5' / 'census.csv')
    assert {row[2] for row in rows} <= {'F_2_plus', 'F_2_minus', 'zero'}


def test_report_consolidates_runs(runner, cli, write_config, tmp_path):
    eq_out = tmp_path / 'eq'
    ev_out = tmp_path / 'ev'
    assert _invoke(runner, cli, 'equilibria', write_config('lambda=2\nforcing.beta0=1.0\n', 'eq.env'),
                   eq_out).exit_code == 0
    assert _invoke(runner, cli, 'evolve', write_config('lambda=2\nforcing.beta0=1.0\nevolve.end=2\n', 'ev.env'),
                   ev_out).exit_code == 0

    out = tmp_path / 'report'
    result = runner.invoke(cli, ['report', str(eq_out), str(ev_out / 'manifest.json'), '--out', str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads((out / 'report.json').read_text(encoding='utf-8'))
    assert len(report['runs']) == 2
    assert report['morse_inventory'] == {'2': [['Z_1', 'xi_1_plus'], ['Z_2', 'xi_1_minus'], ['Z_3', 'zero']]}
    assert 'plots/profiles_lambda_2.svg' in report['plots']
    assert '<svg' in (out / 'plots' / 'profiles_lambda_2.svg').read_text(encoding='utf-8')
    assert (out / 'report.pdf').read_bytes().startswith(b'%PDF')
    assert (out / 'report.docx').read_bytes().startswith(b'PK')
    manifests_repository.verify_manifest(out)


def test_report_lists_verified_connections(runner, cli, tmp_path, grid, constant):
    cfg = evolution_service.solver_config(2.0)
    traj = evolution_service.evolve(spectral_service.from_modes(grid, {1: 1e-3}), -2.0, 0.0, constant, cfg,
                                    origin='connection')
    conn = Connection(j=1, sign=Sign.PLUS, launch_time=-2.0, epsilon=1e-3, trajectory=traj,
                      backward_norms=np.array([2e-3, 1e-3]), forward_distance=np.linspace(1.0, 0.5, len(traj)),
                      certificates={'positivity': True, 'forward_converged': False, 'lap_after_escape': [3]})
    cn_out = tmp_path / 'cn'
    with run_session(cn_out) as session:
        session.register(trajectories_repository.save_connection(cn_out / 'connect' / 'lambda_2' / conn.label, conn))
        finish_run(session, 'connect', ExperimentConfig.from_text('lambda=2\n'), {'ok': True}, {'lambdas': [2.0]})

    out = tmp_path / 'report'
    result = runner.invoke(cli, ['report', str(cn_out), '--out', str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads((out / 'report.json').read_text(encoding='utf-8'))
    [entry] = report['connections']
    assert entry['label'] == 'zeta_1_plus'
    assert (entry['source'], entry['target']) == ('zero', 'xi_1_plus')
    assert entry['lambda'] == 2.0
    assert entry['epsilon'] == 1e-3 and entry['s0'] == -2.0
    assert entry['forward_distance'] == pytest.approx(0.5)
    assert entry['certificates'] == {'positivity': True, 'forward_converged': False}
    assert not entry['passed']
    assert 'plots/connections.svg' in report['plots']
    svg = (out / 'plots' / 'connections.svg').read_text(encoding='utf-8')
    assert 'zeta_1_plus' in svg and 'falhou: forward_converged' in svg


def test_report_rejects_tampered_run(runner, cli, write_config, tmp_path):
    eq_out = tmp_path / 'eq'
    assert _invoke(runner, cli, 'equilibria', write_config('lambda=0.5\n'), eq_out).exit_code == 0
    (eq_out / 'equilibria' / 'summary.csv').write_text('alterado\n', encoding='utf-8')
    result = runner.invoke(cli, ['report', str(eq_out), '--out', str(tmp_path / 'report')])
    assert result.exit_code == 4


@pytest.mark.slow
def test_connect_with_probe(runner, cli, write_config, tmp_path):
    config = write_config('lambda=2\nforcing.kind=sinusoidal\nforcing.beta0=2\nforcing.amplitude=0.5\n'
                          'connect.signs=+\nconnect.launch=-20\nconnect.horizon=40\nconnect.halving=true\n'
                          'probe.trials=2\nprobe.horizon=30\n')
    out = tmp_path / 'cn'
    result = _invoke(runner, cli, 'connect', config, out)
    assert result.exit_code == 0, result.output
    assert (out / 'connect' / 'lambda_2' / 'zeta_1_plus' / 'connection.json').exists()
    assert (out / 'probe' / 'lambda_2.json').exists()
    assert _manifest(out)['certification']['no_homoclinic_lambda_2']

    report_out = tmp_path / 'report'
    assert runner.invoke(cli, ['report', str(out), '--out', str(report_out)]).exit_code == 0
    report = json.loads((report_out / 'report.json').read_text(encoding='utf-8'))
    assert [c['target'] for c in report['connections']] == ['xi_1_plus']
    assert report['connections'][0]['forward_distance'] < 1e-4
