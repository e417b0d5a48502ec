import math

import numpy as np
import pytest

from app.models import Field, Grid, LimitDirection, OscillationClass, OscillationKind, Sign
from app.services import (
    equilibria_service, evolution_service, pullback_service, spectral_service, structure_service,
)


def test_lap_number_of_sine_modes(grid):
    for n in (1, 2, 3):
        zs = structure_service.lap_number(spectral_service.from_modes(grid, {n: 1.0}))
        assert zs.count == 2 * n + 1
        assert zs.simple
        assert not zs.degenerate


def test_lap_number_of_zero_field(grid):
    zs = structure_service.lap_number(Field(grid, np.zeros(grid.n_modes)))
    assert zs.count == 0
    assert zs.degenerate


def test_lap_number_crossings_include_wrap(grid):
    zs = structure_service.lap_number(spectral_service.from_modes(grid, {1: 1.0}))
    assert zs.crossings[0] == -math.pi
    assert zs.crossings[-1] == math.pi
    assert any(abs(c) < 1e-12 for c in zs.crossings)


def test_lap_number_of_equilibria(grid):
    for lam, j in ((2.0, 1), (5.0, 2)):
        e = equilibria_service.solve_equilibrium(lam, 1.0, j, '+', grid)
        assert structure_service.lap_number(e.profile).count == 2 * j + 1


def test_odd_extension_layout():
    ext = structure_service.odd_extension(np.array([1.0, 2.0, 3.0]))
    assert list(ext) == [0.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]


def test_angenent_audit_of_converging_pair(grid, sinusoidal):
    cfg = evolution_service.solver_config(2.0)
    a = evolution_service.evolve(spectral_service.from_modes(grid, {1: 0.5, 3: 0.4}), 0.0, 5.0, sinusoidal, cfg)
    b = evolution_service.evolve(spectral_service.from_modes(grid, {1: 0.2}), 0.0, 5.0, sinusoidal, cfg)
    audit = structure_service.angenent_audit(a, b)
    assert not audit.identically_zero
    assert audit.non_increasing
    assert audit.laps[0] >= audit.laps[-1]
    assert audit.laps[-1] >= 3


def test_angenent_audit_identical_trajectories(grid, sinusoidal):
    cfg = evolution_service.solver_config(2.0)
    a = evolution_service.evolve(spectral_service.from_modes(grid, {1: 0.5}), 0.0, 1.0, sinusoidal, cfg)
    audit = structure_service.angenent_audit(a, a)
    assert audit.identically_zero
    assert audit.non_increasing


def test_reflection_audit_of_symmetric_data(grid, sinusoidal):
    cfg = evolution_service.solver_config(2.0)
    traj = evolution_service.evolve(spectral_service.from_modes(grid, {1: 0.5, 3: 0.2}), 0.0, 5.0, sinusoidal, cfg)
    audit = structure_service.angenent_audit(traj, reflection=math.pi / 2)
    assert audit.identically_zero


def test_reflection_audit_of_asymmetric_data(grid, sinusoidal):
    cfg = evolution_service.solver_config(2.0)
    traj = evolution_service.evolve(spectral_service.from_modes(grid, {1: 0.5, 2: 0.2}), 0.0, 3.0, sinusoidal, cfg)
    audit = structure_service.angenent_audit(traj, reflection=math.pi / 2)
    assert not audit.identically_zero
    assert audit.non_increasing


def test_reflection_laps_follow_lap_number_convention(grid, sinusoidal):
    # ρ u − u = −0.4 sin(2y) para u = 0.5 sin x + 0.2 sin 2x
    u0 = spectral_service.from_modes(grid, {1: 0.5, 2: 0.2})
    cfg = evolution_service.solver_config(2.0)
    traj = evolution_service.evolve(u0, 0.0, 0.5, sinusoidal, cfg)
    audit = structure_service.angenent_audit(traj, reflection=math.pi / 2)
    same = structure_service.lap_number(spectral_service.from_modes(grid, {2: -0.4}))
    assert same.count == 5
    assert audit.laps[0] == same.count
    assert all(lap % 2 == 1 for lap in audit.laps)
    w = structure_service.odd_extension(spectral_service.from_modes(grid, {2: -0.4}).values)
    assert structure_service.circle_sign_changes(w) == same.count


def test_audit_requires_exactly_one_comparison(grid, sinusoidal):
    cfg = evolution_service.solver_config(2.0)
    traj = evolution_service.evolve(spectral_service.from_modes(grid, {1: 0.5}), 0.0, 1.0, sinusoidal, cfg)
    with pytest.raises(ValueError):
        structure_service.angenent_audit(traj)
    with pytest.raises(ValueError):
        structure_service.angenent_audit(traj, traj, reflection=1.0)


def test_classify_equilibria(grid):
    first = equilibria_service.solve_equilibrium(2.0, 1.0, 1, '+', grid)
    second = equilibria_service.solve_equilibrium(5.0, 1.0, 2, '+', grid)
    assert structure_service.classify_oscillation(first.profile).label == 'F_1_plus'
    assert structure_service.classify_oscillation(-first.profile).label == 'F_1_minus'
    assert structure_service.classify_oscillation(second.profile).label == 'F_2_plus'


def test_classify_degenerate_and_mixed_modes(grid):
    zero = structure_service.classify_oscillation(Field(grid, np.zeros(grid.n_modes)))
    assert zero.kind is OscillationKind.ZERO
    mixed = structure_service.classify_oscillation(spectral_service.from_modes(grid, {1: 1.0, 2: 0.5}))
    assert mixed.kind is OscillationKind.UNCLASSIFIED
    assert mixed.defect >= 1e-4


def test_pure_modes_are_classified(grid):
    c = structure_service.classify_oscillation(spectral_service.from_modes(grid, {3: 1.0}))
    assert (c.kind, c.m) == (OscillationKind.F_M_PLUS, 3)


def test_strip_membership(grid):
    phi = equilibria_service.solve_equilibrium(2.0, 2.0, 1, '+', grid)
    lo = equilibria_service.rescale(phi, 2.5)
    hi = equilibria_service.rescale(phi, 1.5)
    inside, violation = structure_service.strip_membership(phi.profile, 1, '+', lo, hi)
    assert inside and violation == 0.0
    inside, violation = structure_service.strip_membership(phi.profile.scaled(1.3), 1, '+', lo, hi)
    assert not inside and violation > 0.01
    with pytest.raises(ValueError):
        structure_service.strip_membership(phi.profile, 1, Sign.MINUS, lo, hi)


def test_pinned_zero_defect(grid):
    assert structure_service.pinned_zero_defect(spectral_service.from_modes(grid, {3: 1.0}), 3) < 1e-10
    assert structure_service.pinned_zero_defect(spectral_service.from_modes(grid, {1: 1.0}), 2) == math.inf
    assert structure_service.pinned_zero_defect(spectral_service.from_modes(grid, {1: 1.0}), 1) == 0.0


def test_omega_limit_with_constant_forcing(grid, constant):
    cfg = evolution_service.solver_config(2.0)
    traj = evolution_service.evolve(spectral_service.from_modes(grid, {1: 0.5, 2: 0.1}), 0.0, 40.0, constant, cfg)
    estimate = structure_service.estimate_limit_set(traj, LimitDirection.OMEGA, 31)
    assert estimate.classification.label == 'F_1_plus'
    assert not estimate.mixed
    assert estimate.strip == (1, Sign.PLUS)
    assert estimate.matched_hull_equilibria
    assert max(d for _, d in estimate.matched_hull_equilibria) < 1e-5
    assert estimate.as_dict()['classification'] == 'F_1_plus'


def test_omega_limit_matches_hull_equilibrium(grid, tanh_forcing):
    cfg = evolution_service.solver_config(2.0)
    traj = evolution_service.evolve(spectral_service.from_modes(grid, {1: 0.5}), 0.0, 40.0, tanh_forcing, cfg)
    estimate = structure_service.estimate_limit_set(traj, 'omega', 31)
    assert estimate.classification.label == 'F_1_plus'
    assert estimate.strip == (1, Sign.PLUS)
    description, distance = estimate.matched_hull_equilibria[-1]
    assert description.startswith('xi_1_plus')
    assert distance < 1e-4


def test_omega_limit_of_periodic_forcing_has_no_hull_limit(grid, sinusoidal):
    cfg = evolution_service.solver_config(2.0)
    traj = evolution_service.evolve(spectral_service.from_modes(grid, {1: 0.5}), 0.0, 30.0, sinusoidal, cfg)
    estimate = structure_service.estimate_limit_set(traj, LimitDirection.OMEGA, 31)
    assert estimate.classification.label == 'F_1_plus'
    assert estimate.matched_hull_equilibria == ()


@pytest.mark.parametrize('forcing_name', ['constant', 'sinusoidal'])
def test_omega_limit_of_second_mode_below_its_threshold(grid, forcing_name, request):
    forcing = request.getfixturevalue(forcing_name)
    cfg = evolution_service.solver_config(2.0)
    traj = evolution_service.evolve(spectral_service.from_modes(grid, {2: 1.0}), 0.0, 60.0, forcing, cfg)
    assert evolution_service.antisymmetry_defect(traj) < 1e-10
    estimate = structure_service.estimate_limit_set(traj, LimitDirection.OMEGA, 31)
    assert estimate.classification.label == 'zero'
    assert structure_service.morse_label(estimate.classification, 2.0) == ('Z_3', 'zero')
    assert traj.final.sup_norm < 1e-10


def test_limit_set_arguments(grid, sinusoidal):
    cfg = evolution_service.solver_config(2.0)
    traj = evolution_service.evolve(spectral_service.from_modes(grid, {1: 0.5}), 0.0, 10.0, sinusoidal, cfg)
    with pytest.raises(ValueError):
        structure_service.estimate_limit_set(traj, LimitDirection.OMEGA, 5)
    with pytest.raises(ValueError):
        structure_service.estimate_limit_set(traj, LimitDirection.ALPHA, 31)


def test_alpha_limit_of_pullback_solution(grid, sinusoidal):
    xi = pullback_service.pullback_equilibrium(1, '-', 2.0, sinusoidal, (0.0, 6.0), grid=grid)
    estimate = structure_service.estimate_limit_set(xi.trajectory, LimitDirection.ALPHA, 5)
    assert estimate.classification.label == 'F_1_minus'
    assert estimate.strip == (1, Sign.MINUS)


def test_morse_inventory_and_labels():
    assert structure_service.morse_inventory(0.5) == [('Z_1', 'zero')]
    assert structure_service.morse_inventory(5.0) == [
        ('Z_1', 'xi_1_plus'), ('Z_2', 'xi_1_minus'), ('Z_3', 'xi_2_plus'), ('Z_4', 'xi_2_minus'), ('Z_5', 'zero'),
    ]
    plus = OscillationClass(kind=OscillationKind.F_M_PLUS, m=1, defect=0.0)
    assert structure_service.morse_label(plus, 2.0) == ('Z_1', 'xi_1_plus')
    zero = OscillationClass(kind=OscillationKind.ZERO, m=0, defect=0.0)
    assert structure_service.morse_label(zero, 2.0) == ('Z_3', 'zero')
    third = OscillationClass(kind=OscillationKind.F_M_PLUS, m=3, defect=0.0)
    assert structure_service.morse_label(third, 2.0) is None


def test_refinement_agreement(grid, sinusoidal):
    cfg = evolution_service.solver_config(2.0)
    u_a = spectral_service.from_modes(grid, {1: 0.5, 2: 0.1})
    u_b = spectral_service.from_modes(grid, {1: 0.2})
    result = structure_service.refinement_agreement(u_a, u_b, 0.0, 2.0, sinusoidal, cfg, Grid(127))
    assert result['agree']
    assert result['coarse'].laps == result['fine'].laps
    assert set(result['coarse'].laps) == {3}
