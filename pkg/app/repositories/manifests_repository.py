"""
Repositório de manifestos de execução
"""

import logging
from pathlib import Path

from app.errors import ManifestIntegrityError
from app.models import RunManifest
from app.storage import read_json, sha256_file, write_manifest

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'


def save_manifest(out_dir: Path, manifest: RunManifest) -> Path:
    return write_manifest(Path(out_dir) / MANIFEST_NAME, manifest.as_dict())


def load_manifest(path: Path) -> RunManifest:
    """Aceita o arquivo ou o diretório que o contém"""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    data = read_json(path)
    return RunManifest(
        command=data['command'],
        config=data.get('config', {}),
        artifacts=data.get('artifacts', []),
        wall_clock=float(data.get('wall_clock', 0.0)),
        versions=data.get('versions', {}),
        certification=data.get('certification', {}),
        summary=data.get('summary', {}),
        errors=data.get('errors', []),
    )


def verify_manifest(path: Path) -> RunManifest:
    """Confere existência e sha256 de cada artefato; falha alto em qualquer divergência"""
    path = Path(path)
    manifest_path = path / MANIFEST_NAME if path.is_dir() else path
    if not manifest_path.exists():
        raise ManifestIntegrityError(f"Manifesto não encontrado: {manifest_path}")
    manifest = load_manifest(manifest_path)
    root = manifest_path.parent
    for entry in manifest.artifacts:
        artifact = root / entry['path']
        if not artifact.exists():
            logger.error(f"Artefato ausente: {artifact}")
            raise ManifestIntegrityError(f"Artefato ausente: {artifact}")
        digest = sha256_file(artifact)
        if digest != entry['sha256']:
            logger.error(f"Hash divergente em {artifact}")
            raise ManifestIntegrityError(f"Hash divergente em {artifact}: {digest} != {entry['sha256']}")
    return manifest
