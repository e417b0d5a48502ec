import logging

import click

from config import Config, get_config

from app.errors import ConfigError


def _validate(config_object: type[Config]) -> None:
    """Falha cedo com configurações fora dos envelopes suportados"""
    n_modes = config_object.N_MODES
    if n_modes < 3:
        raise ConfigError(f"LAB_N_MODES deve ser >= 3. Valor atual: {n_modes}")
    if not 0 < config_object.DT <= config_object.MAX_DT:
        raise ConfigError(f"LAB_DT deve estar em (0, {config_object.MAX_DT}]. Valor atual: {config_object.DT}")
    if config_object.SCHEME not in ('etdrk4', 'imex_bdf2'):
        raise ConfigError(f"LAB_SCHEME desconhecido: {config_object.SCHEME}")
    for name in ('RESIDUAL_TOL', 'PULLBACK_TOL', 'PULLBACK_STRIDE', 'STRIP_SLACK', 'CLASSIFY_THRESHOLD',
                 'CONNECT_EPSILON', 'CONNECT_HORIZON', 'LAUNCH_TOL'):
        if getattr(config_object, name) <= 0:
            raise ConfigError(f"LAB_{name} deve ser positivo. Valor atual: {getattr(config_object, name)}")
    if config_object.CONNECT_LAUNCH >= 0:
        raise ConfigError(f"LAB_CONNECT_LAUNCH deve ser negativo. Valor atual: {config_object.CONNECT_LAUNCH}")
    if (n_modes + 1) & n_modes:
        logging.getLogger(__name__).warning(
            f"LAB_N_MODES={n_modes}: N+1 não é potência de 2; π/2 e π/4 podem não ser pontos do grid"
        )


def create_app(config_object: type[Config] | None = None) -> click.Group:
    """Application factory: configura o laboratório e devolve o grupo de comandos."""
    if config_object is None:
        config_object = get_config()

    logging.basicConfig(format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(config_object.LOG_LEVEL)

    _validate(config_object)

    # Init extensions
    from .extensions import settings
    settings.init_app(config_object)

    @click.group(help='Laboratório numérico da equação de Chafee-Infante não autônoma')
    def cli():
        pass

    # Register commands
    from .commands import register_commands
    register_commands(cli)

    return cli
