"""
Comando connect: conexões heteroclínicas ζ_j^± de 0 para ξ_j^± e sonda anti-homoclínica
"""

import logging
from pathlib import Path

import click

from app.extensions import settings
from app.models import Sign
from app.repositories import trajectories_repository
from app.services import connections_service, equilibria_service
from app.storage import run_session, write_json
from app.utils.cli import common_options, finish_run, lab_command, lambda_dir
from app.utils.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

CERTIFIED_KEYS = ('launch_recession_ok', 'backward_decay', 'forward_converged', 'lap_constant',
                  'positivity', 'zeros_pinned', 'gluing_consistent')


@click.command('connect')
@common_options
@lab_command('connect')
def connect_command(exp: ExperimentConfig, out_dir: Path):
    """Constrói ζ_j^± para cada λ e, se configurado, roda a sonda anti-homoclínica"""
    forcing = exp.forcing()
    grid = exp.grid()
    signs = [Sign.parse(s) for s in exp.get_list('connect.signs', ['+', '-'])]
    requested = exp.get_int_list('connect.modes')
    epsilon = exp.get_float('connect.epsilon')
    s0 = exp.get_float('connect.launch')
    horizon = exp.get_float('connect.horizon')
    halving = exp.get_bool('connect.halving', False)
    trials = exp.get_int('probe.trials', 0)
    probe_horizon = exp.get_float('probe.horizon', 100.0)

    certification = {}
    results = []
    probes = []
    with run_session(out_dir) as session:
        for lam in exp.lambdas():
            cfg = exp.solver(lam)
            modes = requested or list(range(1, equilibria_service.mode_count(lam, grid) + 1))
            for j in modes:
                for sign in signs:
                    conn = connections_service.connect_mode_j(j, lam, forcing, epsilon=epsilon, s0=s0,
                                                              horizon=horizon, sign=sign, grid=grid, cfg=cfg)
                    directory = out_dir / 'connect' / lambda_dir(lam) / conn.label
                    session.register(trajectories_repository.save_connection(directory, conn))
                    key = f"{conn.label}_lambda_{lam:g}"
                    for name in CERTIFIED_KEYS:
                        if name in conn.certificates:
                            certification[f"{name}_{key}"] = conn.certificates[name]
                    entry = {
                        'lambda': lam,
                        'label': conn.label,
                        'epsilon': conn.epsilon,
                        's0': conn.launch_time,
                        'forward_distance_final': conn.certificates['forward_distance_final'],
                        'launch_recession_defect': conn.certificates['launch_recession_defect'],
                    }
                    if halving:
                        defect = connections_service.epsilon_halving_defect(conn, lam)
                        entry['epsilon_halving_defect'] = defect
                        certification[f"halving_{key}"] = defect <= settings.LAUNCH_TOL
                    results.append(entry)

            if trials > 0:
                report = connections_service.no_homoclinic_probe(lam, forcing, trials, horizon=probe_horizon,
                                                                 epsilon=epsilon, grid=grid, cfg=cfg)
                payload = {
                    'lambda': report.lam,
                    'escape_radius_factor': report.escape_radius_factor,
                    'return_radius_factor': report.return_radius_factor,
                    'trials': [
                        {
                            'mode': tr.mode, 'sign': tr.sign.value, 'epsilon': tr.epsilon, 'escaped': tr.escaped,
                            'escape_time': tr.escape_time, 'returned': tr.returned,
                            'lap_at_escape': tr.lap_at_escape, 'lap_late': tr.lap_late,
                        }
                        for tr in report.trials
                    ],
                    'findings': list(report.findings),
                    'passed': report.passed,
                }
                session.register(write_json(out_dir / 'probe' / f"{lambda_dir(lam)}.json", payload))
                certification[f"no_homoclinic_lambda_{lam:g}"] = report.passed
                probes.append({'lambda': lam, 'trials': len(report.trials), 'findings': len(report.findings)})

        summary = {
            'lambdas': exp.lambdas(),
            'n_modes': grid.n_modes,
            'results': results,
            'probes': probes,
        }
        finish_run(session, 'connect', exp, certification, summary)
    click.echo(f"connect: {len(results)} conexões")
