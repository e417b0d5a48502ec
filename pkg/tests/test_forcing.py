import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.models import Direction, ForcingKind
from app.services import forcing_service


def test_sinusoidal_bounds_and_values(sinusoidal):
    assert sinusoidal.beta1 == pytest.approx(1.5)
    assert sinusoidal.beta2 == pytest.approx(2.5)
    assert forcing_service.eval(sinusoidal, math.pi / 2) == pytest.approx(2.5)
    assert forcing_service.eval(sinusoidal, 0.0) == pytest.approx(2.0)


def test_eval_many_matches_eval(sinusoidal, tanh_forcing):
    t = np.linspace(-5.0, 5.0, 11)
    for f in (sinusoidal, tanh_forcing):
        assert_allclose(forcing_service.eval_many(f, t), [forcing_service.eval(f, x) for x in t], rtol=1e-14)


def test_quasiperiodic_bounds():
    f = forcing_service.build('quasiperiodic', 3.0, amplitude=0.5, amplitude2=0.25)
    assert (f.beta1, f.beta2) == pytest.approx((2.25, 3.75))
    assert forcing_service.certify_bounds(f, -50.0, 50.0)['inside']


def test_forcing_must_stay_positive():
    with pytest.raises(ValueError):
        forcing_service.build('sinusoidal', 0.4, amplitude=0.5)
    with pytest.raises(ValueError):
        forcing_service.constant(0.0)


def test_declared_bounds_must_contain_analytic_ones():
    f = forcing_service.build('sinusoidal', 2.0, amplitude=0.5, beta1=1.0, beta2=3.0)
    assert (f.beta1, f.beta2) == (1.0, 3.0)
    with pytest.raises(ValueError):
        forcing_service.build('sinusoidal', 2.0, amplitude=0.5, beta1=1.8)


def test_translate_composes_shifts(sinusoidal):
    shifted = forcing_service.translate(forcing_service.translate(sinusoidal, 1.0), 0.5)
    for t in (-2.0, 0.0, 3.3):
        assert forcing_service.eval(shifted, t) == pytest.approx(forcing_service.eval(sinusoidal, t + 1.5))
    assert (shifted.beta1, shifted.beta2) == (sinusoidal.beta1, sinusoidal.beta2)


def test_periodic_hull_sample(sinusoidal):
    hull = forcing_service.hull_sample(sinusoidal, Direction.PLUS, 4)
    assert_allclose(hull.offsets, [0.0, math.pi / 2, math.pi, 3 * math.pi / 2])
    assert hull.limit is None
    assert len(hull.translates) == 4
    assert forcing_service.eval(hull.translates[1], 0.0) == pytest.approx(2.5)


def test_asymptotically_autonomous_limits(tanh_forcing):
    plus = forcing_service.limit(tanh_forcing, Direction.PLUS)
    minus = forcing_service.limit(tanh_forcing, Direction.MINUS)
    assert plus.kind is ForcingKind.CONSTANT and plus.beta0 == pytest.approx(2.5)
    assert minus.kind is ForcingKind.CONSTANT and minus.beta0 == pytest.approx(1.5)

    hull = forcing_service.hull_sample(tanh_forcing, 'minus', 3)
    assert_allclose(hull.offsets, [-10.0, -20.0, -40.0])
    assert hull.limit_kind is ForcingKind.CONSTANT
    assert forcing_service.sup_distance(hull.translates[-1], hull.limit, 0.0, 10.0) < 1e-12


def test_hull_sample_requires_positive_count(sinusoidal):
    with pytest.raises(ValueError):
        forcing_service.hull_sample(sinusoidal, Direction.PLUS, 0)


def test_constant_forcing_is_its_own_limit(constant):
    assert forcing_service.limit(constant, Direction.MINUS) == constant
    assert forcing_service.period(constant) is None


def test_describe_round_trip(tanh_forcing):
    f = forcing_service.translate(tanh_forcing, 2.0)
    assert forcing_service.from_description(forcing_service.describe(f)) == f


def test_certify_bounds_on_window():
    f = forcing_service.build('sinusoidal', 2.0, amplitude=0.5)
    report = forcing_service.certify_bounds(f, 0.0, 10.0)
    assert report['inside']
    assert report['max'] <= 2.5 and report['min'] >= 1.5
