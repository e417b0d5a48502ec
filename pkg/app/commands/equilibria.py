"""
Comando equilibria: enumeração da família φ_0, φ_{j,β}^± para uma lista de λ
"""

import logging
from pathlib import Path

import click

from app.errors import BifurcationValueError
from app.extensions import settings
from app.models import Sign
from app.repositories import equilibria_repository
from app.services import equilibria_service, structure_service
from app.storage import run_session, write_csv
from app.utils.cli import common_options, finish_run, lab_command, lambda_dir
from app.utils.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

ZEROS_TOL = 1e-6
GLUE_TOL = 1e-7


@click.command('equilibria')
@common_options
@lab_command('equilibria')
def equilibria_command(exp: ExperimentConfig, out_dir: Path):
    """Enumera e grava os equilíbrios para cada λ da configuração"""
    lambdas = exp.lambdas()
    beta = exp.forcing().beta0
    grid = exp.grid()

    counts = {}
    errors = []
    certification = {}
    rows = []
    with run_session(out_dir) as session:
        for lam in lambdas:
            key = f"{lam:g}"
            try:
                family = equilibria_service.enumerate_equilibria(lam, beta, grid)
            except BifurcationValueError as e:
                logger.warning(f"λ={lam} ignorado: {str(e)}")
                errors.append({'lambda': lam, 'error': type(e).__name__, 'message': str(e)})
                continue

            counts[key] = len(family)
            directory = out_dir / 'equilibria' / lambda_dir(lam)
            residual = 0.0
            zeros_defect = 0.0
            glue_defect = 0.0
            for e in family:
                session.register(equilibria_repository.save_equilibrium(directory, e))
                residual = max(residual, e.residual)
                if e.j >= 1:
                    zeros_defect = max(zeros_defect, structure_service.pinned_zero_defect(e.profile, e.j))
                if e.j >= 2 and e.sign is Sign.PLUS:
                    glue_defect = max(glue_defect, equilibria_service.glue_check(e, e.j))
                rows.append((lam, e.label, e.j, e.sign.value, float(e.slope_at_0), float(e.profile.sup_norm),
                             float(e.residual)))

            certification[f"residual_lambda_{key}"] = residual < settings.RESIDUAL_TOL
            certification[f"zeros_lambda_{key}"] = zeros_defect <= ZEROS_TOL
            certification[f"glue_lambda_{key}"] = glue_defect <= GLUE_TOL

        session.register(write_csv(
            session.path('equilibria', 'summary.csv'),
            ['lambda', 'label', 'j', 'sign', 'slope_at_0', 'sup_norm', 'residual'],
            rows,
        ))
        summary = {
            'lambdas': [lam for lam in lambdas if f"{lam:g}" in counts],
            'beta': beta,
            'n_modes': grid.n_modes,
            'counts': counts,
        }
        finish_run(session, 'equilibria', exp, certification, summary, errors)
    click.echo(f"equilibria: {counts}")
