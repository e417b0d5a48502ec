"""
Comando pullback: equilíbrios não autônomos ξ_j^± sobre a grade (λ, j, sinal)
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from app.models import Sign
from app.repositories import trajectories_repository
from app.services import equilibria_service, pullback_service
from app.storage import run_session, write_csv
from app.utils.cli import common_options, finish_run, lab_command, lambda_dir
from app.utils.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

INVARIANCE_TOL = 2e-7
CONSTANT_TOL = 1e-7


def _tasks(exp: ExperimentConfig, grid) -> list[tuple[float, int, Sign]]:
    signs = [Sign.parse(s) for s in exp.get_list('pullback.signs', ['+', '-'])]
    requested = exp.get_int_list('pullback.modes')
    tasks = []
    for lam in exp.lambdas():
        modes = requested or list(range(1, equilibria_service.mode_count(lam, grid) + 1))
        tasks.extend((lam, j, sign) for j in modes for sign in signs)
    return tasks


@click.command('pullback')
@common_options
@lab_command('pullback')
def pullback_command(exp: ExperimentConfig, out_dir: Path):
    """Constrói ξ_j^± por iteração pullback e grava janelas e históricos"""
    forcing = exp.forcing()
    grid = exp.grid()
    window = exp.get_pair('pullback.window', (0.0, 10.0))
    tol = exp.get_float('pullback.tol')
    stride = exp.get_float('pullback.stride')
    max_extensions = exp.get_int('pullback.max_extensions')
    tasks = _tasks(exp, grid)

    def run(task):
        lam, j, sign = task
        xi = pullback_service.pullback_equilibrium(j, sign, lam, forcing, window, tol=tol, grid=grid,
                                                   cfg=exp.solver(lam, n_threads=1), stride=stride,
                                                   max_extensions=max_extensions)
        return xi, pullback_service.invariance_check(xi)

    # ordem dos resultados segue a ordem das tarefas
    with ThreadPoolExecutor(max_workers=exp.threads) as executor:
        outcomes = list(executor.map(run, tasks))

    certification = {}
    results = []
    with run_session(out_dir) as session:
        for (lam, j, sign), (xi, invariance) in zip(tasks, outcomes):
            key = f"{xi.label}_lambda_{lam:g}"
            directory = out_dir / 'pullback' / lambda_dir(lam) / xi.label
            session.register(trajectories_repository.save_nonaut_equilibrium(directory, xi))
            cert = xi.certificates
            certification[f"converged_{key}"] = cert['converged']
            certification[f"strip_{key}"] = cert['strip_inside']
            certification[f"zeros_{key}"] = cert['zeros_pinned']
            certification[f"invariance_{key}"] = invariance <= INVARIANCE_TOL
            entry = {
                'lambda': lam,
                'label': xi.label,
                'final_delta': xi.final_delta,
                'extensions': cert['extensions'],
                'geometric_rate': cert['geometric_rate'],
                'strip_violation': cert['strip_violation'],
                'invariance_defect': invariance,
            }
            if forcing.is_constant:
                phi = equilibria_service.solve_equilibrium(lam, forcing.beta0, j, sign, grid)
                defect = float(np.max(np.abs(xi.trajectory.values - phi.profile.values)))
                entry['constant_reproduction_defect'] = defect
                certification[f"constant_{key}"] = defect <= CONSTANT_TOL
            results.append(entry)

        sections = []
        if 'pullback.section' in exp:
            t_section = exp.get_float('pullback.section')
            samples = exp.get_int('pullback.manifold_samples', 0)
            for lam in exp.lambdas():
                section = pullback_service.assemble_attractor_section(lam, forcing, t_section, grid=grid,
                                                                      manifold_samples=samples)
                header = ['x'] + [f"{m.label}_{i}" if m.label == 'unstable_manifold_sample' else m.label
                                  for i, m in enumerate(section.members)]
                rows = (
                    [float(x)] + [float(m.field.values[k]) for m in section.members]
                    for k, x in enumerate(grid.points)
                )
                session.register(write_csv(out_dir / 'attractor' / lambda_dir(lam) / 'section.csv', header, rows))
                sections.append({'lambda': lam, 't': t_section, 'members': len(section.members),
                                 'morse_labels': [list(z) for z in section.morse_labels]})

        summary = {
            'lambdas': exp.lambdas(),
            'window': list(window),
            'n_modes': grid.n_modes,
            'results': results,
            'sections': sections,
        }
        finish_run(session, 'pullback', exp, certification, summary)
    click.echo(f"pullback: {len(results)} equilíbrios não autônomos")
