import pytest
from click.testing import CliRunner

from config import TestingConfig

from app import create_app
from app.extensions import settings
from app.models import Grid
from app.services import forcing_service


@pytest.fixture(scope='session', autouse=True)
def testing_settings():
    settings.init_app(TestingConfig)
    yield settings


@pytest.fixture
def grid():
    return Grid(TestingConfig.N_MODES)


@pytest.fixture
def sinusoidal():
    """β(t) = 2 + 0.5 sin t"""
    return forcing_service.build('sinusoidal', 2.0, amplitude=0.5)


@pytest.fixture
def constant():
    return forcing_service.constant(1.0)


@pytest.fixture
def tanh_forcing():
    """β(t) = 2 + 0.5 tanh t, limites 1.5 (t → −∞) e 2.5 (t → +∞)"""
    return forcing_service.build('asymptotically_autonomous', 2.0, amplitude=0.5)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def cli():
    return create_app(TestingConfig)


@pytest.fixture
def write_config(tmp_path):
    def _write(text: str, name: str = 'experiment.env'):
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return path
    return _write
