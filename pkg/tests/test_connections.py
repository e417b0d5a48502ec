import math

import numpy as np
import pytest

from app.errors import BifurcationValueError, SeedTooLarge
from app.models import Sign
from app.services import connections_service, evolution_service


def test_growth_rate_and_seed(grid):
    assert connections_service.growth_rate(2.0, 1, grid) == pytest.approx(1.0)
    assert connections_service.growth_rate(5.0, 2, grid) == pytest.approx(1.0)
    seed = connections_service.seed(grid, 2, Sign.MINUS, 1e-3)
    assert seed.sup_norm == pytest.approx(1e-3)
    assert seed.values[15] < 0


def test_large_seed_is_rejected(grid, sinusoidal):
    with pytest.raises(SeedTooLarge) as exc:
        connections_service.connect_mode1(2.0, sinusoidal, epsilon=0.5, s0=-5.0, horizon=5.0, grid=grid)
    assert exc.value.defect > 1e-6


def test_connection_requires_unstable_mode(grid, sinusoidal):
    with pytest.raises(ValueError):
        connections_service.connect_mode1(0.5, sinusoidal, grid=grid)
    with pytest.raises(ValueError):
        connections_service.connect_mode_j(2, 3.0, sinusoidal, grid=grid)


def test_probe_rejects_bifurcation_value(grid, sinusoidal):
    with pytest.raises(BifurcationValueError):
        connections_service.no_homoclinic_probe(4.0, sinusoidal, 1, grid=grid)


def test_probe_finds_no_homoclinic_return(grid, sinusoidal):
    report = connections_service.no_homoclinic_probe(2.0, sinusoidal, 2, horizon=30.0, grid=grid)
    assert report.passed
    assert len(report.trials) == 2
    for trial in report.trials:
        assert trial.escaped and not trial.returned
        assert trial.lap_at_escape == trial.lap_late == 3
    assert report.trials[1].sign is Sign.MINUS


@pytest.mark.slow
def test_first_mode_connection(grid, sinusoidal):
    conn = connections_service.connect_mode1(2.0, sinusoidal, epsilon=1e-4, s0=-20.0, horizon=40.0, grid=grid)
    cert = conn.certificates
    assert conn.label == 'zeta_1_plus'
    assert cert['launch_recession_ok']
    assert cert['backward_decay']
    assert cert['forward_converged']
    assert cert['lap_constant']
    assert cert['positivity']
    assert conn.trajectory.times[0] == -20.0
    assert conn.trajectory.times[-1] == 20.0
    assert conn.forward_distance[-1] < 1e-4
    assert connections_service.epsilon_halving_defect(conn, 2.0) < 1e-6


@pytest.mark.slow
def test_first_mode_connection_minus(grid, sinusoidal):
    conn = connections_service.connect_mode1(2.0, sinusoidal, s0=-20.0, horizon=40.0, sign='-', grid=grid)
    assert conn.label == 'zeta_1_minus'
    assert conn.certificates['positivity']
    assert float(np.max(conn.trajectory.values)) <= 1e-10


@pytest.mark.slow
def test_second_mode_connection_by_gluing(grid, sinusoidal):
    conn = connections_service.connect_mode_j(2, 5.0, sinusoidal, s0=-20.0, horizon=40.0, grid=grid)
    cert = conn.certificates
    assert conn.label == 'zeta_2_plus'
    assert cert['gluing_consistent']
    assert cert['zeros_pinned']
    assert cert['lap_constant']
    assert cert['forward_converged']


@pytest.mark.slow
def test_unstable_manifold_samples_lie_in_strip(grid, sinusoidal):
    samples = connections_service.unstable_manifold_samples(2.0, sinusoidal, 0.0, 4, grid=grid)
    assert len(samples) == 4
    assert np.all(samples[0].values >= 0)
    assert np.all(samples[1].values <= 0)
    bound = math.sqrt(2.0 / sinusoidal.beta1)
    assert max(s.sup_norm for s in samples) <= bound
    with pytest.raises(ValueError):
        connections_service.unstable_manifold_samples(0.5, sinusoidal, 0.0, 2, grid=grid)


def test_launch_without_pre_window(grid, sinusoidal):
    cfg = evolution_service.solver_config(2.0)
    pre, traj = connections_service.launch(grid, 1, Sign.PLUS, 1e-4, -2.0, -2.0, 0.0, sinusoidal, cfg)
    assert pre is None
    assert traj.origin == 'connection'
    assert traj.final.sup_norm > 1e-4
