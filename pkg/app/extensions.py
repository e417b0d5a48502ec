from cachetools import LRUCache

from config import Config, get_config


class Settings:
    """Configuração ativa do laboratório, compartilhada pelos serviços"""

    def __init__(self):
        self._config: type[Config] = get_config()

    def init_app(self, config_object: type[Config]) -> None:
        self._config = config_object
        clear_caches()

    @property
    def config_object(self) -> type[Config]:
        return self._config

    def __getattr__(self, name: str):
        return getattr(self._config, name)


settings = Settings()

# Soluções de equilíbrio já calculadas, por (λ, β, j, sinal, grid)
equilibrium_cache = LRUCache(maxsize=256)

# Tabelas de coeficientes ETDRK4, por (grid, λ, passo)
etdrk4_cache = LRUCache(maxsize=64)

# Matrizes densas da segunda derivada espectral, por grid
operator_cache = LRUCache(maxsize=8)


def clear_caches() -> None:
    equilibrium_cache.clear()
    etdrk4_cache.clear()
    operator_cache.clear()
