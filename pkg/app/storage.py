"""
Módulo de persistência de artefatos (CSV/JSON, hashes e sessões de execução)
"""

import csv
import hashlib
import json
import logging
import threading
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np

logger = logging.getLogger(__name__)

# Escritas de manifesto são serializadas entre threads
_manifest_lock = threading.Lock()


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    if hasattr(value, 'value') and isinstance(getattr(value, 'value'), str):
        return value.value
    return value


def fmt(value: float) -> str:
    """Formato numérico estável (repr do float, reproduzível byte a byte)"""
    return repr(float(value))


def write_json(path: Path, payload: Any) -> Path:
    """Escreve JSON ordenado e indentado"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_to_jsonable(payload), indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path


def read_json(path: Path) -> Any:
    with open(path, encoding='utf-8') as fh:
        return json.load(fh)


def write_csv(path: Path, header: list[str], rows: Iterable[Iterable[Any]]) -> Path:
    """Escreve CSV com cabeçalho; floats no formato estável"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline='', encoding='utf-8') as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, 'rb') as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b''):
            h.update(chunk)
    return h.hexdigest()


class RunSession:
    """Sessão de uma execução: diretório de saída e artefatos registrados"""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.artifacts: list[Path] = []
        self.started = time.perf_counter()
        self._lock = threading.Lock()

    def path(self, *parts: str) -> Path:
        p = self.out_dir.joinpath(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def register(self, paths: Path | Iterable[Path]) -> None:
        if isinstance(paths, (str, Path)):
            paths = [paths]
        with self._lock:
            for p in paths:
                p = Path(p)
                if p not in self.artifacts:
                    self.artifacts.append(p)

    def artifact_entries(self) -> list[dict]:
        """Lista (caminho relativo, sha256) de todos os arquivos registrados"""
        entries = []
        for p in sorted(self.artifacts):
            entries.append({
                'path': p.relative_to(self.out_dir).as_posix(),
                'sha256': sha256_file(p),
            })
        return entries

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.started


@contextmanager
def run_session(out_dir: Path) -> Iterator[RunSession]:
    """Context manager para execuções; registra falhas antes de propagar"""
    session = RunSession(out_dir)
    session.out_dir.mkdir(parents=True, exist_ok=True)
    try:
        yield session
        logger.info(f"Execução concluída em {session.elapsed:.2f}s: {len(session.artifacts)} artefatos em {session.out_dir}")
    except Exception as e:
        logger.error(f"Execução interrompida em {session.out_dir}: {str(e)}")
        raise


def write_manifest(path: Path, payload: dict) -> Path:
    with _manifest_lock:
        return write_json(path, payload)
