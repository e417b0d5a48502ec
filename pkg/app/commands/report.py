"""
Comando report: consolida manifestos verificados em JSON, SVG, PDF e DOCX
"""

import logging
from collections import Counter, defaultdict
from pathlib import Path

import click

from app.repositories import equilibria_repository, manifests_repository, trajectories_repository
from app.services import export_service, structure_service
from app.storage import read_csv, read_json, run_session, write_json
from app.utils.cli import common_options, finish_run, lab_command, lambda_dir
from app.utils.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

MAX_LAP_SERIES = 8


def _profile(path: Path) -> dict:
    e = equilibria_repository.load_equilibrium(path.parent, path.stem)
    grid = e.profile.grid
    return {
        'label': e.label,
        'lambda': e.lam,
        'x': [0.0] + [float(x) for x in grid.points] + [grid.length],
        'y': [0.0] + [float(v) for v in e.profile.values] + [0.0],
        'sup_norm': e.profile.sup_norm,
    }


def _history(directory: Path) -> dict:
    meta = read_json(directory / 'meta.json')
    history = trajectories_repository.load_convergence(directory)
    return {
        'label': meta.get('label', directory.name),
        'lambda': float(meta['lambda']),
        's_k': [s for s, _ in history],
        'delta_k': [d for _, d in history],
    }


def _connection(directory: Path) -> dict:
    conn = trajectories_repository.load_connection(directory)
    checks = {key: value for key, value in conn.certificates.items() if isinstance(value, bool)}
    return {
        'label': conn.label,
        'lambda': conn.trajectory.config.lam,
        'source': 'zero',
        'target': f"xi_{conn.j}_{conn.sign.word}",
        'epsilon': conn.epsilon,
        's0': conn.launch_time,
        'forward_distance': float(conn.forward_distance[-1]),
        'certificates': checks,
        'passed': all(checks.values()),
    }


def _lap_sequences(path: Path, root: Path) -> list[dict]:
    header, rows = read_csv(path)
    name = path.parent.relative_to(root).as_posix()
    if header == ['time', 'lap']:
        return [{'label': name, 'times': [float(r[0]) for r in rows], 'laps': [int(r[1]) for r in rows]}]
    grouped = defaultdict(lambda: ([], []))
    for pair, t, lap in rows:
        grouped[int(pair)][0].append(float(t))
        grouped[int(pair)][1].append(int(lap))
    return [{'label': f"{name} par {p}", 'times': ts, 'laps': ls} for p, (ts, ls) in sorted(grouped.items())]


def consolidate(manifest_paths: list[Path]) -> dict:
    """Verifica cada manifesto e reúne perfis, históricos, conexões, lap numbers, censo e inventário de Morse"""
    runs = []
    profiles = []
    convergence = []
    connections = []
    laps = []
    census = Counter()
    lambdas = set()
    for path in manifest_paths:
        manifest = manifests_repository.verify_manifest(path)
        root = Path(path) if Path(path).is_dir() else Path(path).parent
        runs.append({
            'path': root.as_posix(),
            'command': manifest.command,
            'passed': manifest.passed,
            'certification': manifest.certification,
            'wall_clock': manifest.wall_clock,
        })
        lambdas.update(float(lam) for lam in manifest.summary.get('lambdas', []))
        census.update(manifest.summary.get('census', {}))
        for entry in manifest.artifacts:
            artifact = root / entry['path']
            parts = Path(entry['path']).parts
            if parts[0] == 'equilibria' and artifact.suffix == '.csv' and artifact.with_suffix('.json').exists():
                profiles.append(_profile(artifact))
            elif artifact.name == 'convergence.csv':
                convergence.append(_history(artifact.parent))
            elif artifact.name == 'connection.json':
                connections.append(_connection(artifact.parent))
            elif artifact.name == 'laps.csv':
                laps.extend(_lap_sequences(artifact, root))

    inventory = {f"{lam:g}": structure_service.morse_inventory(lam) for lam in sorted(lambdas)}
    return {
        'runs': runs,
        'profiles': profiles,
        'convergence': convergence,
        'connections': connections,
        'laps': laps,
        'census': dict(sorted(census.items())),
        'morse_inventory': inventory,
    }


@click.command('report')
@click.argument('manifests', nargs=-1, required=True, type=click.Path(exists=True, path_type=Path))
@common_options
@lab_command('report')
def report_command(exp: ExperimentConfig, out_dir: Path, manifests: tuple[Path, ...]):
    """Relatório consolidado de um ou mais diretórios de execução"""
    report = consolidate(list(manifests))

    with run_session(out_dir) as session:
        drawings = []
        by_lambda = defaultdict(list)
        for p in report['profiles']:
            by_lambda[p['lambda']].append(p)
        for lam, profiles in sorted(by_lambda.items()):
            drawings.append((f"profiles_{lambda_dir(lam)}.svg", export_service.profile_chart(profiles)))
        if report['convergence']:
            drawings.append(('convergence.svg', export_service.convergence_chart(report['convergence'])))
        if report['connections']:
            drawings.append(('connections.svg', export_service.connection_chart(report['connections'])))
        if report['laps']:
            drawings.append(('laps.svg', export_service.lap_chart(report['laps'][:MAX_LAP_SERIES])))
        if report['morse_inventory']:
            drawings.append(('morse.svg', export_service.morse_chart(report['morse_inventory'])))

        for name, drawing in drawings:
            path = session.path('plots', name)
            path.write_text(export_service.to_svg(drawing), encoding='utf-8')
            session.register(path)

        session.register(write_json(session.path('report.json'), {
            'runs': report['runs'],
            'census': report['census'],
            'morse_inventory': {lam: [list(z) for z in entries] for lam, entries in report['morse_inventory'].items()},
            'profiles': [{k: p[k] for k in ('label', 'lambda', 'sup_norm')} for p in report['profiles']],
            'convergence': report['convergence'],
            'connections': report['connections'],
            'laps': report['laps'],
            'plots': [f"plots/{name}" for name, _ in drawings],
        }))

        pdf = session.path('report.pdf')
        pdf.write_bytes(export_service.export_to_pdf(report, [d for _, d in drawings]))
        docx = session.path('report.docx')
        docx.write_bytes(export_service.export_to_docx(report))
        session.register([pdf, docx])

        summary = {
            'inputs': [r['path'] for r in report['runs']],
            'lambdas': [float(lam) for lam in report['morse_inventory']],
            'inventory_sizes': {lam: len(entries) for lam, entries in report['morse_inventory'].items()},
            'plots': len(drawings),
            'inputs_passed': all(r['passed'] for r in report['runs']),
        }
        finish_run(session, 'report', exp, {'inputs_verified': True}, summary)
    click.echo(f"report: {len(report['runs'])} execuções consolidadas")
