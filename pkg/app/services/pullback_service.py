"""
Serviço de equilíbrios não autônomos ξ_j^±(t) construídos como limites pullback
"""

import logging
import math

import numpy as np

from app.errors import NonConvergence
from app.extensions import settings
from app.models import (
    AttractorSection, DecayCurve, Field, Forcing, ForcingKind, Grid, LabeledField, MaximalityEntry,
    NonAutEquilibrium, Sign, SolverConfig, Trajectory,
)
from app.services.equilibria_service import equilibria_service
from app.services.evolution_service import evolution_service
from app.services.forcing_service import forcing_service
from app.services.spectral_service import spectral_service

logger = logging.getLogger(__name__)


class PullbackService:
    """Iteração pullback com semente φ_{j,β₁}^± e certificados da janela"""

    def _config(self, lam: float, j: int, cfg: SolverConfig | None) -> SolverConfig:
        cfg = cfg or evolution_service.solver_config(lam)
        if cfg.lam != lam:
            raise ValueError(f"SolverConfig com λ={cfg.lam} difere de λ={lam}")
        if cfg.mode_stride == 1 and j > 1:
            cfg = cfg.with_(mode_stride=j)
        return cfg

    def shift_invariant(self, forcing: Forcing, stride: float) -> bool:
        """β(· − Δ) ≡ β: então T(t_a, t_a − kΔ) = T(t_a, t_a − Δ)^k"""
        if forcing.kind is ForcingKind.CONSTANT:
            return True
        period = forcing_service.period(forcing)
        if period is None:
            return False
        ratio = stride / period
        return round(ratio) >= 1 and abs(ratio - round(ratio)) <= 1e-9 * ratio

    def pullback_equilibrium(self, j: int, sign: Sign | str, lam: float, forcing: Forcing,
                             window: tuple[float, float], tol: float | None = None,
                             grid: Grid | None = None, cfg: SolverConfig | None = None,
                             seed: Field | None = None, stride: float | None = None,
                             max_extensions: int | None = None) -> NonAutEquilibrium:
        """ξ_j^±(t) = lim T_β(t,s)φ_{j,β₁}^± na janela [t_a, t_b]"""
        sign = Sign.parse(sign)
        if j < 1 or sign is Sign.NONE:
            raise ValueError(f"pullback_equilibrium exige j >= 1 e sinal +/- (j={j}, sinal={sign.value})")
        t_a, t_b = float(window[0]), float(window[1])
        if not (math.isfinite(t_a) and math.isfinite(t_b)) or t_b < t_a:
            raise ValueError(f"Janela inválida: {window}")
        grid = grid or equilibria_service.default_grid()
        tol = settings.PULLBACK_TOL if tol is None else tol
        stride = settings.PULLBACK_STRIDE if stride is None else stride
        max_extensions = settings.PULLBACK_MAX_EXTENSIONS if max_extensions is None else max_extensions
        cfg = self._config(lam, j, cfg)

        if seed is None:
            seed = equilibria_service.solve_equilibrium(lam, forcing.beta1, j, sign, grid).profile

        history: list[tuple[float, float]] = []
        previous: np.ndarray | None = None
        window_traj: Trajectory | None = None
        periodic = self.shift_invariant(forcing, stride)
        start = seed
        try:
            for k in range(1, max_extensions + 1):
                s_k = t_a - k * stride
                if periodic:
                    # uma volta a mais do mapa de período sobre o início anterior
                    start = evolution_service.evolve_final(start, t_a - stride, t_a, forcing, cfg)
                else:
                    start = evolution_service.evolve_final(seed, s_k, t_a, forcing, cfg)
                window_traj = evolution_service.evolve(start, t_a, t_b, forcing, cfg, origin='pullback')
                current = window_traj.values
                if previous is not None:
                    delta = float(np.max(np.abs(current - previous)))
                    history.append((s_k, delta))
                    logger.debug(f"Pullback j={j}{sign.value} s={s_k}: delta={delta:.3e}")
                    if delta < tol:
                        break
                previous = current
            else:
                raise NonConvergence(
                    f"Pullback j={j}{sign.value} λ={lam} não convergiu em {max_extensions} extensões",
                    history=history,
                )
        except NonConvergence as e:
            logger.error(f"Erro no pullback j={j}, λ={lam}: {str(e)}", exc_info=True)
            raise

        xi = NonAutEquilibrium(j=j, sign=sign, lam=lam, trajectory=window_traj,
                               convergence_history=tuple(history))
        xi.certificates.update(self.certify(xi, grid, tol))
        logger.info(
            f"ξ_{j}{sign.value} λ={lam} convergiu após {len(history) + 1} extensões (delta final {xi.final_delta:.2e})"
        )
        return xi

    def certify(self, xi: NonAutEquilibrium, grid: Grid, tol: float) -> dict:
        """Certificados: delta final, monotonicidade, taxa geométrica, faixa Y_j^± e zeros fixos"""
        from app.services.structure_service import structure_service

        deltas = [d for _, d in xi.convergence_history]
        tail = deltas[1:] if len(deltas) > 2 else deltas
        monotone = all(b < a for a, b in zip(tail, tail[1:]))
        positive = [(s, d) for s, d in xi.convergence_history if d > 0]
        rate = None
        if len(positive) >= 2:
            s_vals = np.array([s for s, _ in positive])
            rate = float(np.polyfit(-s_vals, np.log([d for _, d in positive]), 1)[0])

        forcing = xi.forcing
        eq_lo = equilibria_service.solve_equilibrium(xi.lam, forcing.beta2, xi.j, xi.sign, grid)
        eq_hi = equilibria_service.solve_equilibrium(xi.lam, forcing.beta1, xi.j, xi.sign, grid)
        strip_violation = max(
            structure_service.strip_membership(state, xi.j, xi.sign, eq_lo, eq_hi)[1] for state in xi.states
        )
        zeros_defect = max(structure_service.pinned_zero_defect(state, xi.j) for state in xi.states)
        return {
            'final_delta': xi.final_delta,
            'converged': xi.final_delta < tol,
            'monotone_deltas': monotone,
            'geometric_rate': rate,
            'strip_violation': strip_violation,
            'strip_inside': strip_violation <= settings.STRIP_SLACK,
            'zeros_defect': zeros_defect,
            'zeros_pinned': zeros_defect <= 1e-5,
            'extensions': len(xi.convergence_history) + 1,
        }

    def invariance_check(self, xi: NonAutEquilibrium) -> float:
        """Reevolui ξ(t_a) e ξ(t_meio) até t_b e compara com ξ(t_b)"""
        traj = xi.trajectory
        defect = 0.0
        for i in {0, len(traj) // 2}:
            if traj.times[i] == traj.times[-1]:
                continue
            end = evolution_service.evolve_final(traj.states[i], float(traj.times[i]), float(traj.times[-1]),
                                                 traj.forcing, traj.config)
            defect = max(defect, (end - traj.final).sup_norm)
        return defect

    def maximality_check(self, xi: NonAutEquilibrium, candidates: list[Trajectory]) -> list[MaximalityEntry]:
        """Excesso pontual máximo de cada candidato sobre ξ_1^+ na janela"""
        if xi.j != 1 or xi.sign is not Sign.PLUS:
            raise ValueError("maximality_check exige ξ_1^+")
        entries = []
        reference = xi.trajectory.values
        for index, cand in enumerate(candidates):
            if len(cand) != len(xi.times) or not np.allclose(cand.times, xi.times, rtol=0, atol=1e-9):
                raise ValueError(f"Candidato {index} não compartilha os tempos da janela")
            excess = cand.values - reference
            per_time = excess.max(axis=1)
            worst = int(np.argmax(per_time))
            entries.append(MaximalityEntry(index=index, excess=max(0.0, float(per_time[worst])),
                                           time_of_max=float(xi.times[worst])))
        return entries

    def forward_attraction_check(self, u0: Field, lam: float, forcing: Forcing, horizon: float,
                                 cfg: SolverConfig | None = None,
                                 xi: NonAutEquilibrium | None = None) -> DecayCurve:
        """||T_β(t,0)u0 − ξ_1^+(t)||_{H¹} ao longo de [0, horizon]"""
        if np.any(u0.values < 0) or not np.any(u0.values > 0):
            raise ValueError("forward_attraction_check exige u0 >= 0 não nulo")
        if lam <= 1:
            raise ValueError(f"forward_attraction_check exige λ > 1 (recebido {lam})")
        cfg = self._config(lam, 1, cfg)
        if xi is None:
            xi = self.pullback_equilibrium(1, Sign.PLUS, lam, forcing, (0.0, horizon), grid=u0.grid, cfg=cfg)
        traj = evolution_service.evolve(u0, 0.0, horizon, forcing, cfg)
        if len(traj) != len(xi.times):
            raise ValueError("Trajetória e ξ_1^+ com amostragens diferentes")
        distances = spectral_service.h1_distances(u0.grid, traj.values, xi.trajectory.values)
        return DecayCurve(times=traj.times, distances=distances)

    def restriction_consistency(self, xi: NonAutEquilibrium) -> float:
        """ξ_j^+ restrito a [0, π/j] contra o ξ_1^+ do problema no intervalo"""
        if xi.j == 1:
            return 0.0
        grid = xi.states[0].grid
        sub = equilibria_service.interval_grid(grid, xi.j)
        cfg = xi.trajectory.config.with_(mode_stride=1)
        window = (float(xi.times[0]), float(xi.times[-1]))
        interval_xi = self.pullback_equilibrium(1, xi.sign, xi.lam, xi.forcing, window, grid=sub, cfg=cfg)
        if len(interval_xi.times) != len(xi.times):
            raise ValueError("Janelas com amostragens diferentes")
        defect = 0.0
        for full, part in zip(xi.states, interval_xi.states):
            restricted = spectral_service.evaluate(full, sub.points)
            defect = max(defect, float(np.max(np.abs(restricted - part.values))))
        return defect

    def assemble_attractor_section(self, lam: float, forcing: Forcing, t: float, grid: Grid | None = None,
                                   manifold_samples: int = 0) -> AttractorSection:
        """Seção A(t): {0} ∪ {ξ_j^±(t)}, com amostras de W^u(0)(t) quando N = 1"""
        from app.services.structure_service import structure_service

        grid = grid or equilibria_service.default_grid()
        n = equilibria_service.mode_count(lam, grid)
        members = [LabeledField('zero', Field(grid, np.zeros(grid.n_modes)))]
        for j in range(1, n + 1):
            plus = self.pullback_equilibrium(j, Sign.PLUS, lam, forcing, (t, t), grid=grid)
            members.append(LabeledField(f"xi_{j}_plus", plus.states[-1]))
            members.append(LabeledField(f"xi_{j}_minus", -plus.states[-1]))
        if n == 1 and manifold_samples > 0:
            from app.services.connections_service import connections_service
            for sample in connections_service.unstable_manifold_samples(lam, forcing, t, manifold_samples, grid=grid):
                members.append(LabeledField('unstable_manifold_sample', sample))
        return AttractorSection(t=t, lam=lam, members=tuple(members),
                                morse_labels=tuple(structure_service.morse_inventory(lam, grid)))


pullback_service = PullbackService()
