import pytest

from app.errors import ConfigError
from app.models import ForcingKind, Scheme
from app.utils.experiment_config import ExperimentConfig

EXAMPLE = """
# experimento de teste
lambda=0.5,2,5
forcing.kind=sinusoidal
forcing.beta0=2.0
forcing.amplitude=0.5
solver.scheme=imex_bdf2
solver.dt=0.01
evolve.u0_modes=1:1.0,3:-0.25
pullback.window=0,10
omega.antisymmetric=true
"""


def test_parse_typed_values():
    exp = ExperimentConfig.from_text(EXAMPLE)
    assert exp.lambdas() == [0.5, 2.0, 5.0]
    assert exp.get_modes('evolve.u0_modes') == {1: 1.0, 3: -0.25}
    assert exp.get_pair('pullback.window', (0.0, 1.0)) == (0.0, 10.0)
    assert exp.get_bool('omega.antisymmetric') is True
    assert exp.get_int('omega.samples', 7) == 7
    assert exp.seed == 0
    assert 'forcing.kind' in exp and 'forcing.omega' not in exp


def test_forcing_and_solver():
    exp = ExperimentConfig.from_text(EXAMPLE)
    forcing = exp.forcing()
    assert forcing.kind is ForcingKind.SINUSOIDAL
    assert (forcing.beta1, forcing.beta2) == pytest.approx((1.5, 2.5))
    cfg = exp.solver(2.0)
    assert cfg.scheme is Scheme.IMEX_BDF2
    assert cfg.dt == pytest.approx(0.01)
    assert exp.solver(2.0, mode_stride=2).mode_stride == 2


def test_defaults_without_file():
    exp = ExperimentConfig()
    assert exp.forcing().kind is ForcingKind.CONSTANT
    assert exp.lambdas() == []
    assert exp.grid().n_modes == 63
    assert exp.solver(2.0).scheme is Scheme.ETDRK4


def test_invalid_values_raise_config_error():
    bad = ExperimentConfig.from_text('lambda=a,b\nsolver.dt=fast\nomega.antisymmetric=talvez\n')
    with pytest.raises(ConfigError):
        bad.lambdas()
    with pytest.raises(ConfigError):
        bad.get_float('solver.dt')
    with pytest.raises(ConfigError):
        bad.get_bool('omega.antisymmetric')
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text('forcing.kind=sawtooth').forcing()
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text('forcing.beta0=-1').forcing()
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text('solver.scheme=rk45').solver(2.0)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text('solver.dt=0.5').solver(2.0)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text('pullback.window=1,2,3').get_pair('pullback.window', (0.0, 1.0))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text('evolve.u0_modes=1-1.0').get_modes('evolve.u0_modes')
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text('n_modes=0').grid()


def test_line_without_value_is_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text('lambda=2\nsolto\n')


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(tmp_path / 'nada.env')


def test_write_and_reload(tmp_path):
    exp = ExperimentConfig.from_text(EXAMPLE)
    exp.set('seed', 42)
    exp.set('label', 'corrida de teste')
    exp.set('omega.refine', False)
    exp.set('connect.modes', [1, 2])
    exp.set('threads', None)
    path = exp.write(tmp_path / 'config.env')
    again = ExperimentConfig.from_file(path)
    assert again.snapshot() == exp.snapshot()
    assert again.seed == 42
    assert again.get_str('label') == 'corrida de teste'
    assert again.get_int_list('connect.modes') == [1, 2]
    assert 'threads' not in again
    assert path.read_text(encoding='utf-8').splitlines() == sorted(path.read_text(encoding='utf-8').splitlines())
