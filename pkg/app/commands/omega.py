"""
Comando omega: corpus aleatório de dados iniciais, limites ω classificados e censo de Morse
"""

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from app.models import Grid, LimitDirection, OscillationKind
from app.services import evolution_service, spectral_service, structure_service
from app.storage import run_session, write_csv
from app.utils.cli import common_options, finish_run, lab_command, lambda_dir
from app.utils.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

CORPUS_MODES = 8


def random_corpus(rng: np.random.Generator, grid: Grid, count: int, antisymmetric: bool,
                  amplitude: float) -> list[dict[int, float]]:
    """Coeficientes N(0,1)/n² nos modos n ≤ 8 (só pares se anti-simétrico)"""
    modes = [n for n in range(1, min(CORPUS_MODES, grid.n_modes) + 1) if not antisymmetric or n % 2 == 0]
    corpus = []
    for _ in range(count):
        draws = rng.standard_normal(len(modes))
        corpus.append({n: amplitude * float(a) / (n * n) for n, a in zip(modes, draws)})
    return corpus


def expected_modes(antisymmetric: bool) -> int:
    return 2 if antisymmetric else 1


@click.command('omega')
@common_options
@lab_command('omega')
def omega_command(exp: ExperimentConfig, out_dir: Path):
    """Evolui um corpus aleatório e classifica os limites ω de cada trajetória"""
    forcing = exp.forcing()
    grid = exp.grid()
    samples = exp.get_int('omega.samples', 0)
    antisymmetric = exp.get_bool('omega.antisymmetric', False)
    horizon = exp.get_float('omega.horizon', 60.0)
    amplitude = exp.get_float('omega.amplitude', 1.0)
    audit_pairs = exp.get_int('omega.audit_pairs', 0)
    audit_horizon = exp.get_float('omega.audit_horizon', 5.0)
    refine = exp.get_bool('omega.refine', False)
    rng = np.random.default_rng(exp.seed)
    m_expected = expected_modes(antisymmetric)

    certification = {}
    census = Counter()
    per_lambda = []
    with run_session(out_dir) as session:
        for lam in exp.lambdas():
            cfg = exp.solver(lam, n_threads=1, mode_stride=2 if antisymmetric else None)
            sample_count = exp.get_int('omega.sample_count',
                                       int(math.ceil(6.0 / (cfg.dt * cfg.snapshot_stride))) + 1)
            corpus = random_corpus(rng, grid, samples, antisymmetric, amplitude)
            pairs = [random_corpus(rng, grid, 2, antisymmetric, amplitude) for _ in range(audit_pairs)]

            def run(modes):
                traj = evolution_service.evolve(spectral_service.from_modes(grid, modes), 0.0, horizon, forcing, cfg)
                estimate = structure_service.estimate_limit_set(traj, LimitDirection.OMEGA, sample_count)
                return estimate, structure_service.morse_label(estimate.classification, lam, grid)

            with ThreadPoolExecutor(max_workers=exp.threads) as executor:
                outcomes = list(executor.map(run, corpus))

            rows = []
            classes = Counter()
            mixed = 0
            unassigned = 0
            unexpected = 0
            for index, (estimate, morse) in enumerate(outcomes):
                c = estimate.classification
                classes[c.label] += 1
                mixed += int(estimate.mixed)
                unassigned += int(morse is None)
                if c.kind is not OscillationKind.ZERO and not (
                        c.kind in (OscillationKind.F_M_PLUS, OscillationKind.F_M_MINUS) and c.m == m_expected):
                    unexpected += 1
                hull = min((d for _, d in estimate.matched_hull_equilibria), default=None)
                rows.append((
                    index, lam, c.label, c.m, float(c.defect), estimate.mixed,
                    '' if estimate.strip is None else f"{estimate.strip[0]}{estimate.strip[1].value}",
                    '' if estimate.strip_violation is None else float(estimate.strip_violation),
                    '' if morse is None else morse[0],
                    '' if morse is None else morse[1],
                    '' if hull is None else float(hull),
                ))
            directory = out_dir / 'omega' / lambda_dir(lam)
            session.register(write_csv(
                directory / 'census.csv',
                ['run', 'lambda', 'classification', 'm', 'defect', 'mixed', 'strip', 'strip_violation',
                 'morse_set', 'morse_label', 'hull_distance'],
                rows,
            ))
            census.update(classes)
            key = f"{lam:g}"
            certification[f"no_mixed_lambda_{key}"] = mixed == 0
            certification[f"morse_assigned_lambda_{key}"] = unassigned == 0
            certification[f"census_lambda_{key}"] = unexpected == 0

            lap_rows = []
            violations = 0
            disagreements = 0
            for p, (modes_a, modes_b) in enumerate(pairs):
                u_a = spectral_service.from_modes(grid, modes_a)
                u_b = spectral_service.from_modes(grid, modes_b)
                if refine:
                    refined = Grid(2 * (grid.n_modes + 1) - 1, length=grid.length)
                    agreement = structure_service.refinement_agreement(u_a, u_b, 0.0, audit_horizon, forcing, cfg,
                                                                       refined)
                    audit = agreement['coarse']
                    disagreements += agreement['disagreements']
                else:
                    audit = structure_service.angenent_audit(
                        evolution_service.evolve(u_a, 0.0, audit_horizon, forcing, cfg),
                        evolution_service.evolve(u_b, 0.0, audit_horizon, forcing, cfg),
                    )
                violations += len(audit.violations)
                lap_rows.extend((p, float(t), lap) for t, lap in zip(audit.times, audit.laps))
            if pairs:
                session.register(write_csv(directory / 'laps.csv', ['pair', 'time', 'lap'], lap_rows))
                certification[f"laps_nonincreasing_lambda_{key}"] = violations == 0
                if refine:
                    certification[f"refinement_lambda_{key}"] = disagreements == 0

            per_lambda.append({
                'lambda': lam,
                'runs': len(outcomes),
                'classes': dict(sorted(classes.items())),
                'mixed': mixed,
                'unassigned': unassigned,
                'lap_violations': violations,
                'inventory': [list(z) for z in structure_service.morse_inventory(lam, grid)],
            })

        summary = {
            'lambdas': exp.lambdas(),
            'n_modes': grid.n_modes,
            'seed': exp.seed,
            'antisymmetric': antisymmetric,
            'census': dict(sorted(census.items())),
            'per_lambda': per_lambda,
        }
        finish_run(session, 'omega', exp, certification, summary)
    click.echo(f"omega: {sum(census.values())} trajetórias classificadas")
