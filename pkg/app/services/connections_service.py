"""
Serviço de conexões heteroclínicas ζ_j^± de 0 para ξ_j^±
"""

import logging
import math

import numpy as np

from app.errors import BifurcationValueError, SeedTooLarge
from app.extensions import settings
from app.models import (
    Connection, Field, Forcing, Grid, ProbeReport, ProbeTrial, Sign, SolverConfig, Trajectory,
)
from app.services.equilibria_service import equilibria_service
from app.services.evolution_service import evolution_service
from app.services.pullback_service import pullback_service
from app.services.spectral_service import spectral_service
from app.services.structure_service import structure_service

logger = logging.getLogger(__name__)


class ConnectionsService:
    """Sombra do modo instável dominante lançada no passado remoto"""

    def _defaults(self, epsilon, s0, horizon) -> tuple[float, float, float]:
        return (
            settings.CONNECT_EPSILON if epsilon is None else float(epsilon),
            settings.CONNECT_LAUNCH if s0 is None else float(s0),
            settings.CONNECT_HORIZON if horizon is None else float(horizon),
        )

    def growth_rate(self, lam: float, mode: int, grid: Grid) -> float:
        """μ = λ − (mode·π/L)², autovalor do modo semeado"""
        k = mode * math.pi / grid.length
        return lam - k * k

    def seed(self, grid: Grid, mode: int, sign: Sign, epsilon: float) -> Field:
        return spectral_service.from_modes(grid, {mode: sign.factor * epsilon})

    def launch(self, grid: Grid, mode: int, sign: Sign, epsilon: float, s_launch: float, s0: float,
               t_end: float, forcing: Forcing, cfg: SolverConfig) -> tuple[Trajectory | None, Trajectory]:
        """Semente ε·sin em s_launch; trajetória no retículo de [s0, t_end] (e pré-janela se s_launch < s0)"""
        start = self.seed(grid, mode, sign, epsilon)
        pre = None
        if s_launch < s0:
            pre = evolution_service.evolve(start, s_launch, s0, forcing, cfg, origin='connection')
            start = pre.final
        traj = evolution_service.evolve(start, s0, t_end, forcing, cfg, origin='connection')
        return pre, traj

    def _config(self, lam: float, stride: int, cfg: SolverConfig | None) -> SolverConfig:
        cfg = cfg or evolution_service.solver_config(lam)
        return cfg.with_(mode_stride=stride)

    def _recession(self, grid: Grid, mode: int, sign: Sign, lam: float, forcing: Forcing, epsilon: float,
                   s0: float, t_end: float, cfg: SolverConfig, traj: Trajectory) -> tuple[float, np.ndarray]:
        """Relança em 2·s0 com ε·e^{−μ|s0|}; devolve (defeito na janela, normas sup da pré-janela em tempo reverso)"""
        if s0 >= 0:
            raise ValueError(f"Teste de recessão exige s0 < 0 (recebido {s0})")
        s_far = 2.0 * s0
        mu = self.growth_rate(lam, mode, grid)
        eps_far = epsilon * math.exp(-mu * (s0 - s_far))
        pre, relaunched = self.launch(grid, mode, sign, eps_far, s_far, s0, t_end, forcing, cfg)
        defect = float(np.max(np.abs(relaunched.values - traj.values)))
        backward = np.max(np.abs(pre.values), axis=1)[::-1]
        return defect, backward

    def _check_seed(self, defect: float, label: str) -> None:
        if defect > settings.LAUNCH_TOL:
            err = SeedTooLarge(f"Recessão do lançamento de {label} alterou a trajetória em {defect:.2e}", defect=defect)
            logger.error(f"Erro ao certificar {label}: {str(err)}", exc_info=True)
            raise err

    def _escape_laps(self, traj: Trajectory, epsilon: float) -> list[int]:
        sups = np.max(np.abs(traj.values), axis=1)
        escaped = np.flatnonzero(sups >= settings.ESCAPE_FACTOR * epsilon)
        if len(escaped) == 0:
            return []
        return [structure_service.lap_number(traj.states[i]).count for i in range(int(escaped[0]), len(traj))]

    def _certify(self, conn_traj: Trajectory, xi_traj: Trajectory, j: int, sign: Sign, epsilon: float,
                 defect: float, backward: np.ndarray) -> tuple[np.ndarray, dict]:
        grid = conn_traj.grid
        distance = spectral_service.h1_distances(grid, conn_traj.values, xi_traj.values)
        signed = sign.factor * conn_traj.values
        laps = self._escape_laps(conn_traj, epsilon)
        certificates = {
            'launch_recession_defect': defect,
            'launch_recession_ok': defect <= settings.LAUNCH_TOL,
            'backward_decay': bool(np.all(np.diff(backward) < 0)),
            'forward_distance_final': float(distance[-1]),
            'forward_converged': float(distance[-1]) < settings.FORWARD_DISTANCE_TOL,
            'lap_after_escape': sorted(set(laps)),
            'lap_constant': set(laps) == {2 * j + 1},
        }
        if j == 1:
            certificates['min_signed_value'] = float(np.min(signed))
            certificates['positivity'] = float(np.min(signed)) >= -1e-10
        else:
            zeros_defect = max(structure_service.pinned_zero_defect(s, j) for s in conn_traj.states)
            certificates['zeros_defect'] = zeros_defect
            certificates['zeros_pinned'] = zeros_defect <= 1e-5
        return distance, certificates

    def connect_mode1(self, lam: float, forcing: Forcing, epsilon: float | None = None, s0: float | None = None,
                      horizon: float | None = None, sign: Sign | str = Sign.PLUS, grid: Grid | None = None,
                      cfg: SolverConfig | None = None) -> Connection:
        """ζ_1^±: semente ±ε·sin(x) em s0, convergência para ±ξ_1^+"""
        sign = Sign.parse(sign)
        if lam <= 1:
            raise ValueError(f"connect_mode1 exige λ > 1 (recebido {lam})")
        epsilon, s0, horizon = self._defaults(epsilon, s0, horizon)
        grid = grid or equilibria_service.default_grid()
        cfg = self._config(lam, 1, cfg)
        t_end = s0 + horizon

        _, traj = self.launch(grid, 1, sign, epsilon, s0, s0, t_end, forcing, cfg)
        defect, backward = self._recession(grid, 1, sign, lam, forcing, epsilon, s0, t_end, cfg, traj)
        self._check_seed(defect, f"zeta_1_{sign.word}")
        xi = pullback_service.pullback_equilibrium(1, sign, lam, forcing, (s0, t_end), grid=grid, cfg=cfg)
        distance, certificates = self._certify(traj, xi.trajectory, 1, sign, epsilon, defect, backward)
        logger.info(f"ζ_1{sign.value} λ={lam}: distância final {distance[-1]:.2e}")
        return Connection(j=1, sign=sign, launch_time=s0, epsilon=epsilon, trajectory=traj,
                          backward_norms=backward, forward_distance=distance, certificates=certificates)

    def connect_mode_j(self, j: int, lam: float, forcing: Forcing, epsilon: float | None = None,
                       s0: float | None = None, horizon: float | None = None, sign: Sign | str = Sign.PLUS,
                       grid: Grid | None = None, cfg: SolverConfig | None = None) -> Connection:
        """ζ_j^±: conexão de modo 1 em [0, π/j] colada por reflexão ímpar"""
        sign = Sign.parse(sign)
        grid = grid or equilibria_service.default_grid()
        if j == 1:
            return self.connect_mode1(lam, forcing, epsilon, s0, horizon, sign, grid, cfg)
        if j < 1 or self.growth_rate(lam, j, grid) <= 0:
            raise ValueError(f"connect_mode_j exige j >= 1 e λ > j² (j={j}, λ={lam})")
        epsilon, s0, horizon = self._defaults(epsilon, s0, horizon)
        t_end = s0 + horizon
        base = cfg or evolution_service.solver_config(lam)
        sub = equilibria_service.interval_grid(grid, j)
        sub_cfg = base.with_(mode_stride=1)
        full_cfg = base.with_(mode_stride=j)

        try:
            _, part = self.launch(sub, 1, sign, epsilon, s0, s0, t_end, forcing, sub_cfg)
            defect, backward = self._recession(sub, 1, sign, lam, forcing, epsilon, s0, t_end, sub_cfg, part)
            self._check_seed(defect, f"zeta_{j}_{sign.word}")
            glued_states = tuple(equilibria_service.glue(s, j, grid) for s in part.states)
            glued = Trajectory(t0=part.t0, times=part.times, states=glued_states, forcing=forcing,
                               config=full_cfg, origin='connection')
            _, direct = self.launch(grid, j, sign, epsilon, s0, s0, t_end, forcing, full_cfg)
            gluing_defect = float(np.max(np.abs(direct.values - glued.values)))
            xi = pullback_service.pullback_equilibrium(j, sign, lam, forcing, (s0, t_end), grid=grid, cfg=full_cfg)
        except Exception as e:
            logger.error(f"Erro ao construir ζ_{j}{sign.value}, λ={lam}: {str(e)}", exc_info=True)
            raise

        distance, certificates = self._certify(glued, xi.trajectory, j, sign, epsilon, defect, backward)
        certificates['gluing_defect'] = gluing_defect
        certificates['gluing_consistent'] = gluing_defect <= 1e-8
        logger.info(f"ζ_{j}{sign.value} λ={lam}: distância final {distance[-1]:.2e}, colagem {gluing_defect:.2e}")
        return Connection(j=j, sign=sign, launch_time=s0, epsilon=epsilon, trajectory=glued,
                          backward_norms=backward, forward_distance=distance, certificates=certificates)

    def epsilon_halving_defect(self, conn: Connection, lam: float) -> float:
        """Semente ε/2 lançada ln(2)/μ antes reproduz a trajetória em [s0, t_end]"""
        traj = conn.trajectory
        grid = traj.grid
        cfg = traj.config
        mu = self.growth_rate(lam, conn.j, grid)
        s_early = conn.launch_time - math.log(2.0) / mu
        t_end = float(traj.times[-1])
        if conn.j == 1:
            _, halved = self.launch(grid, 1, conn.sign, conn.epsilon / 2.0, s_early, conn.launch_time, t_end,
                                    traj.forcing, cfg)
        else:
            _, halved = self.launch(grid, conn.j, conn.sign, conn.epsilon / 2.0, s_early, conn.launch_time,
                                    t_end, traj.forcing, cfg.with_(mode_stride=conn.j))
        return float(np.max(np.abs(halved.values - traj.values)))

    def unstable_manifold_samples(self, lam: float, forcing: Forcing, t: float, count: int,
                                  grid: Grid | None = None) -> list[Field]:
        """Pontos de W^u(0)(t): sementes ±ε·sin(x) lançadas a distâncias crescentes de t"""
        grid = grid or equilibria_service.default_grid()
        epsilon = settings.CONNECT_EPSILON
        mu = self.growth_rate(lam, 1, grid)
        if mu <= 0:
            raise ValueError(f"W^u(0) trivial para λ={lam}")
        cfg = evolution_service.solver_config(lam)
        reach = math.log(1.0 / epsilon) / mu
        samples = []
        for i, tau in enumerate(np.linspace(0.25 * reach, 1.5 * reach, count)):
            sign = Sign.PLUS if i % 2 == 0 else Sign.MINUS
            start = self.seed(grid, 1, sign, epsilon)
            samples.append(evolution_service.evolve_final(start, t - float(tau), t, forcing, cfg))
        return samples

    def no_homoclinic_probe(self, lam: float, forcing: Forcing, trials: int, horizon: float = 100.0,
                            epsilon: float | None = None, grid: Grid | None = None,
                            cfg: SolverConfig | None = None) -> ProbeReport:
        """Sementes ε·sin(kx), k ≤ N: escapam de 10ε e nunca voltam a 0.1ε; lap não aumenta"""
        if equilibria_service.is_bifurcation_value(lam):
            raise BifurcationValueError(f"λ={lam} é ponto de bifurcação (quadrado exato)")
        grid = grid or equilibria_service.default_grid()
        cfg = (cfg or evolution_service.solver_config(lam)).with_(mode_stride=1)
        epsilon = settings.CONNECT_EPSILON if epsilon is None else epsilon
        escape_factor = settings.ESCAPE_FACTOR
        return_factor = settings.RETURN_FACTOR
        n = equilibria_service.mode_count(lam, grid)

        results = []
        findings = []
        for k in range(1, n + 1):
            for trial in range(trials):
                sign = Sign.PLUS if trial % 2 == 0 else Sign.MINUS
                eps = epsilon * 0.5 ** (trial // 2)
                traj = evolution_service.evolve(self.seed(grid, k, sign, eps), 0.0, horizon, forcing, cfg)
                sups = np.max(np.abs(traj.values), axis=1)
                escaped_at = np.flatnonzero(sups >= escape_factor * eps)
                if len(escaped_at) == 0:
                    results.append(ProbeTrial(k, sign, eps, False, None, False, None, None))
                    findings.append(f"k={k} trial={trial}: não escapou de {escape_factor}·ε")
                    continue
                first = int(escaped_at[0])
                returned = bool(np.any(sups[first:] < return_factor * eps))
                lap_escape = structure_service.lap_number(traj.states[first]).count
                lap_late = structure_service.lap_number(traj.final).count
                trial_result = ProbeTrial(k, sign, eps, True, float(traj.times[first]), returned, lap_escape, lap_late)
                results.append(trial_result)
                if returned:
                    findings.append(f"k={k} trial={trial}: retornou a {return_factor}·ε de zero")
                if trial_result.lap_increase:
                    findings.append(f"k={k} trial={trial}: lap aumentou de {lap_escape} para {lap_late}")
        for finding in findings:
            logger.warning(f"Sonda homoclínica λ={lam}: {finding}")
        return ProbeReport(lam=lam, escape_radius_factor=escape_factor, return_radius_factor=return_factor,
                           trials=tuple(results), findings=tuple(findings))


connections_service = ConnectionsService()
