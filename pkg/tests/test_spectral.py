import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.models import Field, Grid
from app.services import spectral_service


def test_grid_points_and_wavenumbers():
    grid = Grid(63)
    assert grid.points[0] == pytest.approx(math.pi / 64)
    assert grid.points[31] == pytest.approx(math.pi / 2)
    assert_allclose(grid.wavenumbers[:3], [1.0, 2.0, 3.0])
    assert_allclose(Grid(3, length=2.0).wavenumbers, [math.pi / 2, math.pi, 3 * math.pi / 2])


def test_grid_rejects_bad_sizes():
    with pytest.raises(ValueError):
        Grid(0)
    with pytest.raises(ValueError):
        Grid(7, length=-1.0)


def test_dst_inverse_undoes_forward(grid):
    rng = np.random.default_rng(3)
    f = Field(grid, rng.standard_normal(grid.n_modes))
    back = spectral_service.dst_inverse(spectral_service.dst_forward(f))
    assert_allclose(back.values, f.values, atol=1e-13)


def test_from_modes_samples_sine_series(grid):
    f = spectral_service.from_modes(grid, {1: 1.0, 3: -0.25})
    expected = np.sin(grid.points) - 0.25 * np.sin(3 * grid.points)
    assert_allclose(f.values, expected, atol=1e-13)


def test_from_modes_rejects_mode_outside_grid(grid):
    with pytest.raises(ValueError):
        spectral_service.from_modes(grid, {grid.n_modes + 1: 1.0})


def test_norms_of_first_mode(grid):
    norms = spectral_service.norms(spectral_service.from_modes(grid, {1: 1.0}))
    assert norms.sup_norm == pytest.approx(1.0, abs=1e-13)
    assert norms.l2_norm == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)
    assert norms.h1_seminorm == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)


def test_h1_seminorm_weights_wavenumber(grid):
    norms = spectral_service.norms(spectral_service.from_modes(grid, {3: 1.0}))
    assert norms.h1_seminorm == pytest.approx(3 * math.sqrt(math.pi / 2), rel=1e-12)


def test_second_derivative_is_spectral(grid):
    f = spectral_service.from_modes(grid, {2: 1.0})
    d2 = spectral_service.second_derivative(f)
    assert_allclose(d2.values, -4.0 * f.values, atol=1e-12)


def test_evaluate_and_derivative_off_grid(grid):
    f = spectral_service.from_modes(grid, {1: 1.0, 2: 0.5})
    x = np.array([0.1, 1.0, 2.5])
    assert_allclose(spectral_service.evaluate(f, x), np.sin(x) + 0.5 * np.sin(2 * x), atol=1e-12)
    assert_allclose(spectral_service.derivative_at(f, x), np.cos(x) + np.cos(2 * x), atol=1e-11)


def test_resample_preserves_band_limited_field(grid):
    f = spectral_service.from_modes(grid, {1: 1.0, 5: 0.1})
    fine = Grid(127)
    g = spectral_service.resample(f, fine)
    assert_allclose(g.values, np.sin(fine.points) + 0.1 * np.sin(5 * fine.points), atol=1e-12)
    with pytest.raises(ValueError):
        spectral_service.resample(f, Grid(127, length=2.0))


def test_project_stride_keeps_multiples():
    coeffs = np.arange(1.0, 9.0)
    assert_allclose(spectral_service.project_stride(coeffs, 2), [0, 2, 0, 4, 0, 6, 0, 8])
    assert_allclose(spectral_service.project_stride(coeffs, 1), coeffs)


def test_detect_stride(grid):
    def coeffs(modes):
        return spectral_service.forward_values(spectral_service.from_modes(grid, modes).values)

    assert spectral_service.detect_stride(coeffs({2: 1.0, 4: 0.3})) == 2
    assert spectral_service.detect_stride(coeffs({3: 0.2, 9: -0.1})) == 3
    assert spectral_service.detect_stride(coeffs({1: 1.0, 3: 1.0})) == 1
    assert spectral_service.detect_stride(coeffs({4: 1.0, 6: 1.0})) == 2
    assert spectral_service.detect_stride(np.zeros(grid.n_modes)) == 1
    # ruído acima da tolerância relativa desfaz o subespaço
    noisy = coeffs({2: 1.0})
    noisy[0] = 1e-9
    assert spectral_service.detect_stride(noisy) == 1


def test_locate_zeros_of_third_mode(grid):
    zeros = spectral_service.locate_zeros(spectral_service.from_modes(grid, {3: 1.0}))
    assert len(zeros) == 2
    assert_allclose(zeros, [math.pi / 3, 2 * math.pi / 3], atol=1e-10)


def test_locate_zeros_on_grid_point(grid):
    zeros = spectral_service.locate_zeros(spectral_service.from_modes(grid, {2: 1.0}))
    assert len(zeros) == 1
    assert zeros[0] == pytest.approx(math.pi / 2, abs=1e-10)


def test_zero_field_has_no_zeros(grid):
    assert spectral_service.locate_zeros(Field(grid, np.zeros(grid.n_modes))) == ()


def test_field_rejects_non_finite_values(grid):
    values = np.zeros(grid.n_modes)
    values[3] = np.nan
    with pytest.raises(ValueError):
        Field(grid, values)
    with pytest.raises(ValueError):
        Field(grid, np.zeros(grid.n_modes + 1))
