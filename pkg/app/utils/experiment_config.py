"""
Configuração de experimentos (arquivo key=value com chaves pontuadas)
"""

import re
from io import StringIO
from pathlib import Path

from dotenv import dotenv_values

from app.errors import ConfigError
from app.extensions import settings
from app.models import Forcing, Grid, Scheme, SolverConfig

_PLAIN = re.compile(r"^[^\s'\"#\\]*$")

FORCING_PARAMS = ('amplitude', 'omega', 'amplitude2', 'omega2', 'beta1', 'beta2')


class ExperimentConfig:
    """Parâmetros de um experimento; os valores ficam como texto até serem lidos com tipo"""

    def __init__(self, values: dict[str, str] | None = None, source: Path | None = None):
        self.values: dict[str, str] = dict(values or {})
        self.source = source

    @classmethod
    def from_text(cls, text: str, source: Path | None = None) -> 'ExperimentConfig':
        parsed = dotenv_values(stream=StringIO(text), interpolate=False)
        values = {}
        for key, value in parsed.items():
            if value is None:
                raise ConfigError(f"Linha sem '=' para a chave '{key}'")
            values[key] = value
        return cls(values, source=source)

    @classmethod
    def from_file(cls, path: Path) -> 'ExperimentConfig':
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Arquivo de configuração não encontrado: {path}")
        return cls.from_text(path.read_text(encoding='utf-8'), source=path)

    def to_text(self) -> str:
        lines = []
        for key in sorted(self.values):
            value = self.values[key]
            if not _PLAIN.match(value):
                if "'" in value:
                    raise ConfigError(f"Valor não representável para '{key}': {value!r}")
                value = f"'{value}'"
            lines.append(f"{key}={value}")
        return '\n'.join(lines) + '\n'

    def write(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text(), encoding='utf-8')
        return path

    def set(self, key: str, value) -> None:
        if value is None:
            return
        if isinstance(value, (list, tuple)):
            value = ','.join(str(v) for v in value)
        elif isinstance(value, bool):
            value = 'true' if value else 'false'
        self.values[key] = str(value)

    def snapshot(self) -> dict[str, str]:
        return dict(sorted(self.values.items()))

    def __contains__(self, key: str) -> bool:
        return key in self.values

    # ------------------------------------------------------------------
    # leitura tipada
    # ------------------------------------------------------------------

    def _raw(self, key: str) -> str | None:
        value = self.values.get(key)
        if value is None or value.strip() == '':
            return None
        return value.strip()

    def get_str(self, key: str, default=None):
        raw = self._raw(key)
        return default if raw is None else raw

    def get_float(self, key: str, default=None):
        raw = self._raw(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"'{key}' deve ser numérico: {raw!r}")

    def get_int(self, key: str, default=None):
        raw = self._raw(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"'{key}' deve ser inteiro: {raw!r}")

    def get_bool(self, key: str, default=None):
        raw = self._raw(key)
        if raw is None:
            return default
        lowered = raw.lower()
        if lowered in ('true', '1', 'yes', 'sim'):
            return True
        if lowered in ('false', '0', 'no', 'nao', 'não'):
            return False
        raise ConfigError(f"'{key}' deve ser booleano: {raw!r}")

    def get_list(self, key: str, default=None) -> list[str]:
        value = self.values.get(key)
        if value is None:
            return list(default or [])
        return [item.strip() for item in value.split(',') if item.strip()]

    def get_float_list(self, key: str, default=None) -> list[float]:
        try:
            return [float(v) for v in self.get_list(key, default)]
        except ValueError:
            raise ConfigError(f"'{key}' deve ser uma lista de números: {self.values.get(key)!r}")

    def get_int_list(self, key: str, default=None) -> list[int]:
        try:
            return [int(v) for v in self.get_list(key, default)]
        except ValueError:
            raise ConfigError(f"'{key}' deve ser uma lista de inteiros: {self.values.get(key)!r}")

    def get_pair(self, key: str, default: tuple[float, float]) -> tuple[float, float]:
        items = self.get_float_list(key, default)
        if len(items) != 2:
            raise ConfigError(f"'{key}' deve ter dois valores (início,fim): {self.values.get(key)!r}")
        return items[0], items[1]

    def get_modes(self, key: str, default: str = '') -> dict[int, float]:
        """Pares modo:amplitude, ex. '1:1.0,3:-0.25'"""
        modes = {}
        for item in self.get_list(key, [default] if default else []):
            try:
                n, a = item.split(':')
                modes[int(n)] = float(a)
            except ValueError:
                raise ConfigError(f"'{key}' deve conter pares modo:amplitude: {item!r}")
        return modes

    # ------------------------------------------------------------------
    # objetos do domínio
    # ------------------------------------------------------------------

    @property
    def seed(self) -> int:
        return self.get_int('seed', 0)

    @property
    def threads(self) -> int:
        return self.get_int('solver.threads', settings.THREADS)

    def lambdas(self) -> list[float]:
        return self.get_float_list('lambda')

    def grid(self) -> Grid:
        n_modes = self.get_int('n_modes', settings.N_MODES)
        try:
            return Grid(n_modes)
        except ValueError as e:
            raise ConfigError(str(e))

    def forcing(self) -> Forcing:
        from app.services.forcing_service import forcing_service

        kind = self.get_str('forcing.kind', 'constant')
        beta0 = self.get_float('forcing.beta0', 1.0)
        params = {name: self.get_float(f"forcing.{name}") for name in FORCING_PARAMS}
        try:
            return forcing_service.build(kind, beta0, **params)
        except ValueError as e:
            raise ConfigError(f"Forcing inválido: {str(e)}")

    def solver(self, lam: float, **overrides) -> SolverConfig:
        from app.services.evolution_service import evolution_service

        scheme = self.get_str('solver.scheme')
        if scheme and scheme not in {s.value for s in Scheme}:
            raise ConfigError(f"Esquema desconhecido: {scheme!r}")
        params = dict(
            dt=self.get_float('solver.dt'),
            scheme=Scheme(scheme) if scheme else None,
            dealias=self.get_bool('solver.dealias'),
            dealias_factor=self.get_float('solver.dealias_factor'),
            snapshot_stride=self.get_int('solver.snapshot_stride'),
            n_threads=self.get_int('solver.threads'),
        )
        params.update(overrides)
        try:
            return evolution_service.solver_config(lam, **params)
        except ValueError as e:
            raise ConfigError(f"Solver inválido: {str(e)}")

