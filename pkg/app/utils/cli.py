"""
Utilitários dos comandos: opções comuns, mapeamento de erros e manifesto
"""

import logging
import platform
from functools import wraps
from importlib import metadata
from pathlib import Path

import click

from app.errors import CertificationError, LabError
from app.models import RunManifest
from app.storage import RunSession, write_json
from app.utils.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

VERSIONED_PACKAGES = ('numpy', 'scipy', 'click', 'python-dotenv', 'cachetools', 'reportlab', 'python-docx')


def common_options(f):
    """--config, --out, --threads e --seed"""
    f = click.option('--seed', type=int, default=None, help='Semente do gerador aleatório')(f)
    f = click.option('--threads', type=click.IntRange(min=1), default=None, help='Threads de execução')(f)
    f = click.option('--out', 'out_dir', type=click.Path(file_okay=False, path_type=Path), default=None,
                     help='Diretório de saída')(f)
    f = click.option('--config', 'config_path', type=click.Path(dir_okay=False, path_type=Path), default=None,
                     help='Arquivo key=value do experimento')(f)
    return f


def load_experiment(config_path: Path | None, threads: int | None, seed: int | None) -> ExperimentConfig:
    exp = ExperimentConfig.from_file(config_path) if config_path else ExperimentConfig()
    exp.set('solver.threads', threads)
    exp.set('seed', seed)
    return exp


def resolve_out_dir(exp: ExperimentConfig, out_dir: Path | None, command: str) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    return Path(exp.get_str('output', f"runs/{command}"))


def _fail(command: str, out_dir: Path | None, error: Exception, exit_code: int):
    logger.error(f"Erro no comando {command}: {str(error)}", exc_info=True)
    if out_dir is not None:
        report = {
            'command': command,
            'error': type(error).__name__,
            'message': str(error),
            'exit_code': exit_code,
        }
        for attr in ('history', 'time', 'sup_norm', 'defect'):
            if hasattr(error, attr):
                report[attr] = getattr(error, attr)
        write_json(Path(out_dir) / 'error.json', report)
    click.echo(f"erro: {error}", err=True)
    raise click.exceptions.Exit(exit_code)


def lab_command(command: str):
    """
    Decorator que carrega a configuração do experimento e converte exceções em códigos de saída.
    """
    def decorator(f):
        @wraps(f)
        def decorated_function(config_path=None, out_dir=None, threads=None, seed=None, **kwargs):
            out = Path(out_dir) if out_dir is not None else None
            try:
                exp = load_experiment(config_path, threads, seed)
                out = resolve_out_dir(exp, out, command)
                return f(exp, out, **kwargs)
            except click.exceptions.Exit:
                raise
            except LabError as e:
                _fail(command, out, e, e.exit_code)
            except ValueError as e:
                _fail(command, out, e, 2)
        return decorated_function
    return decorator


def versions() -> dict:
    found = {'python': platform.python_version()}
    for name in VERSIONED_PACKAGES:
        try:
            found[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            found[name] = None
    return found


def finish_run(session: RunSession, command: str, exp: ExperimentConfig, certification: dict,
               summary: dict, errors: list | None = None) -> RunManifest:
    """Grava config.env e manifest.json; falha com código 4 se alguma certificação reprovou"""
    from app.repositories import manifests_repository

    session.register(exp.write(session.path('config.env')))
    manifest = RunManifest(
        command=command,
        config=exp.snapshot(),
        artifacts=session.artifact_entries(),
        wall_clock=session.elapsed,
        versions=versions(),
        certification={k: bool(v) for k, v in certification.items()},
        summary=summary,
        errors=list(errors or []),
    )
    manifests_repository.save_manifest(session.out_dir, manifest)
    logger.info(f"Manifesto de {command} gravado em {session.out_dir} ({len(manifest.artifacts)} artefatos)")
    if not manifest.passed:
        failed = sorted(k for k, v in manifest.certification.items() if not v)
        raise CertificationError(f"Certificações reprovadas: {', '.join(failed)}")
    return manifest


def lambda_dir(lam: float) -> str:
    return f"lambda_{lam:g}"
