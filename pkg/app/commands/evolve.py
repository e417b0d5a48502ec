"""
Comando evolve: trajetória direta T_β(t,s)u0 com normas, lap numbers e verificações do processo
"""

import logging
from pathlib import Path

import click
import numpy as np

from app.errors import ConfigError
from app.models import Scheme
from app.repositories import trajectories_repository
from app.services import evolution_service, spectral_service, structure_service
from app.storage import run_session, write_csv
from app.utils.cli import common_options, finish_run, lab_command, lambda_dir
from app.utils.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

COMPOSITION_TOL = 1e-9
SANDWICH_TOL = 1e-8
POSITIVITY_FLOOR = -1e-10
ANTISYMMETRY_TOL = 1e-10


@click.command('evolve')
@common_options
@lab_command('evolve')
def evolve_command(exp: ExperimentConfig, out_dir: Path):
    """Evolui u0 (combinação de senos) para cada λ da configuração"""
    lambdas = exp.lambdas()
    forcing = exp.forcing()
    grid = exp.grid()
    modes = exp.get_modes('evolve.u0_modes', '1:1.0')
    if any(n < 1 or n > grid.n_modes for n in modes):
        raise ConfigError(f"Modos de u0 fora de 1..{grid.n_modes}: {sorted(modes)}")
    s = exp.get_float('evolve.start', 0.0)
    t = exp.get_float('evolve.end', 10.0)
    u0 = spectral_service.from_modes(grid, modes)
    positive = bool(np.all(u0.values >= 0))
    antisymmetric = bool(modes) and all(n % 2 == 0 for n in modes)

    certification = {}
    results = []
    with run_session(out_dir) as session:
        for lam in lambdas:
            key = f"{lam:g}"
            cfg = exp.solver(lam)
            traj = evolution_service.evolve(u0, s, t, forcing, cfg)
            directory = out_dir / 'evolve' / lambda_dir(lam)
            session.register(trajectories_repository.save_trajectory(directory / 'trajectory', traj))

            norm_rows = []
            for time, state in zip(traj.times, traj.states):
                norms = spectral_service.norms(state)
                norm_rows.append((float(time), norms.sup_norm, norms.l2_norm, norms.h1_seminorm))
            session.register(write_csv(directory / 'norms.csv', ['time', 'sup', 'l2', 'h1'], norm_rows))

            laps = structure_service.lap_sequence(traj)
            session.register(write_csv(directory / 'laps.csv', ['time', 'lap'],
                                       ((float(tt), lap) for tt, lap in zip(traj.times, laps))))

            entry = {'lambda': lam, 'final_sup_norm': traj.final.sup_norm, 'snapshots': len(traj)}
            if cfg.scheme is Scheme.ETDRK4 and t > s:
                # τ sobre a malha de passos
                tau = s + round(0.5 * (t - s) / cfg.dt) * cfg.dt
                defect = evolution_service.composition_defect(u0, s, tau, t, forcing, cfg)
                entry['composition_defect'] = defect
                certification[f"composition_lambda_{key}"] = defect < COMPOSITION_TOL
            if positive:
                minimum = float(np.min(traj.values))
                entry['min_value'] = minimum
                certification[f"positivity_lambda_{key}"] = minimum >= POSITIVITY_FLOOR
                sandwich = evolution_service.sandwich_check(u0, s, t, forcing, cfg)
                entry['sandwich_violation'] = sandwich.max_violation
                certification[f"sandwich_lambda_{key}"] = sandwich.max_violation < SANDWICH_TOL
            if antisymmetric:
                defect = evolution_service.antisymmetry_defect(traj)
                entry['antisymmetry_defect'] = defect
                certification[f"antisymmetry_lambda_{key}"] = defect < ANTISYMMETRY_TOL
            results.append(entry)

        summary = {
            'lambdas': lambdas,
            'n_modes': grid.n_modes,
            'window': [s, t],
            'u0_modes': {str(n): a for n, a in sorted(modes.items())},
            'results': results,
        }
        finish_run(session, 'evolve', exp, certification, summary)
    click.echo(f"evolve: {len(results)} trajetórias")
