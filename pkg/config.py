"""
Configurações do laboratório Chafee-Infante não autônomo
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Carregar config.env antes de definir a classe Config
_env_path = Path(__file__).resolve().parent / 'config.env'
if _env_path.exists():
    load_dotenv(dotenv_path=_env_path, override=True)


def _env_bool(name: str, default: str) -> bool:
    return os.environ.get(name, default).lower() == 'true'


class Config:
    """Configuração base"""
    LOG_LEVEL = os.environ.get('LAB_LOG_LEVEL', 'INFO')

    # Discretização espacial (255 pontos interiores = 256 intervalos, DST-I de tamanho 2^8)
    N_MODES = int(os.environ.get('LAB_N_MODES', 255))

    # Integração temporal
    DT = float(os.environ.get('LAB_DT', 0.01))
    SCHEME = os.environ.get('LAB_SCHEME', 'etdrk4')
    DEALIAS = _env_bool('LAB_DEALIAS', 'True')
    DEALIAS_FACTOR = float(os.environ.get('LAB_DEALIAS_FACTOR', 2.0))
    SNAPSHOT_STRIDE = int(os.environ.get('LAB_SNAPSHOT_STRIDE', 10))
    THREADS = int(os.environ.get('LAB_THREADS', 1))
    BLOWUP_FACTOR = float(os.environ.get('LAB_BLOWUP_FACTOR', 1e3))
    MAX_DT = 0.1

    # Equilíbrios (shooting)
    SHOOTING_STEPS = int(os.environ.get('LAB_SHOOTING_STEPS', 10_000))
    SHOOTING_MAX_ITER = int(os.environ.get('LAB_SHOOTING_MAX_ITER', 200))
    RESIDUAL_TOL = float(os.environ.get('LAB_RESIDUAL_TOL', 1e-8))

    # Pullback
    PULLBACK_STRIDE = float(os.environ.get('LAB_PULLBACK_STRIDE', 5.0))
    PULLBACK_TOL = float(os.environ.get('LAB_PULLBACK_TOL', 1e-7))
    PULLBACK_MAX_EXTENSIONS = int(os.environ.get('LAB_PULLBACK_MAX_EXTENSIONS', 40))

    # Estrutura de zeros e classificação
    STRIP_SLACK = float(os.environ.get('LAB_STRIP_SLACK', 1e-6))
    CLASSIFY_THRESHOLD = float(os.environ.get('LAB_CLASSIFY_THRESHOLD', 1e-4))
    M_MAX = int(os.environ.get('LAB_M_MAX', 8))
    ZERO_SUP_NORM = 1e-12

    # Conexões
    CONNECT_EPSILON = float(os.environ.get('LAB_CONNECT_EPSILON', 1e-4))
    CONNECT_LAUNCH = float(os.environ.get('LAB_CONNECT_LAUNCH', -20.0))
    CONNECT_HORIZON = float(os.environ.get('LAB_CONNECT_HORIZON', 60.0))
    LAUNCH_TOL = float(os.environ.get('LAB_LAUNCH_TOL', 1e-6))
    FORWARD_DISTANCE_TOL = 1e-4
    ESCAPE_FACTOR = 10.0
    RETURN_FACTOR = 0.1

    # Hull
    HULL_ESCAPE_START = float(os.environ.get('LAB_HULL_ESCAPE_START', 10.0))


class DefaultConfig(Config):
    """Configuração padrão (resolução de aceitação)"""


class RefinedConfig(Config):
    """Configuração refinada, usada como oráculo de resolução"""
    N_MODES = 511


class TestingConfig(Config):
    """Configuração de teste"""
    N_MODES = 63
    DT = 0.02
    LOG_LEVEL = 'WARNING'


# Configuração por ambiente
config = {
    'default': DefaultConfig,
    'refined': RefinedConfig,
    'testing': TestingConfig,
}


def get_config(name: str | None = None) -> type[Config]:
    """Seleciona a configuração pelo nome ou pela variável LAB_ENV"""
    name = name or os.environ.get('LAB_ENV', 'default')
    return config.get(name, DefaultConfig)
