"""
Serviço de estrutura de zeros: lap number, auditorias de Angenent, classes 𝔉_m^± e conjuntos limite
"""

import logging
import math

import numpy as np

from app.errors import NoSuchEquilibrium
from app.extensions import settings
from app.models import (
    Direction, Equilibrium, Field, Forcing, Grid, LapAudit, LimitDirection, LimitSetEstimate,
    OscillationClass, OscillationKind, Sign, SolverConfig, Trajectory, ZeroStructure,
)
from app.services.equilibria_service import equilibria_service
from app.services.evolution_service import evolution_service
from app.services.forcing_service import forcing_service
from app.services.spectral_service import spectral_service

logger = logging.getLogger(__name__)

_ZERO_REL = 1e-9
_SIMPLE_REL = 1e-6
_MONO_SAMPLES = 257


class StructureService:
    """Análise de zeros e classificação de oscilações simétricas"""

    # ------------------------------------------------------------------
    # círculo da extensão ímpar 2L-periódica
    # ------------------------------------------------------------------

    def circle_points(self, grid: Grid) -> np.ndarray:
        """y_i = −L + i·h, i = 0..2N+1"""
        return -grid.length + grid.spacing * np.arange(2 * (grid.n_modes + 1))

    def odd_extension(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        zero = np.zeros(values.shape[:-1] + (1,))
        return np.concatenate([zero, -values[..., ::-1], zero, values], axis=-1)

    def _circle_changes(self, values: np.ndarray, threshold: float) -> list[tuple[int, int]]:
        signs = spectral_service.sign_pattern(values, threshold)
        nz = np.flatnonzero(signs)
        if len(nz) < 2:
            return []
        pairs = []
        for a, b in zip(nz, np.roll(nz, -1)):
            if signs[a] != signs[b]:
                pairs.append((int(a), int(b)))
        return pairs

    def _seam_count(self, changes: list[tuple[int, int]]) -> int:
        """Zeros em [−L, L]: uma mudança através da costura ±L conta nas duas pontas"""
        return len(changes) + (1 if any(b < a for a, b in changes) else 0)

    def circle_sign_changes(self, values: np.ndarray, threshold: float | None = None) -> int:
        """Zeros de uma sequência periódica sobre [−L, L] (histerese relativa ao sup), na contagem do lap number"""
        sup = float(np.max(np.abs(values))) if len(values) else 0.0
        if sup < settings.ZERO_SUP_NORM:
            return 0
        return self._seam_count(self._circle_changes(values, _ZERO_REL * sup if threshold is None else threshold))

    # ------------------------------------------------------------------
    # lap number
    # ------------------------------------------------------------------

    def lap_number(self, f: Field) -> ZeroStructure:
        """ℓ(f): zeros da extensão ímpar 2L-periódica em [−L, L], contando ±L"""
        sup = f.sup_norm
        if sup < settings.ZERO_SUP_NORM:
            return ZeroStructure(count=0, simple=False, crossings=(), degenerate=True)
        grid = f.grid
        period = 2.0 * grid.length
        y = self.circle_points(grid)
        w = self.odd_extension(f.values)
        slope_floor = _SIMPLE_REL * spectral_service.norms(f).h1_seminorm
        changes = self._circle_changes(w, _ZERO_REL * sup)

        crossings = []
        simple = True
        for a, b in changes:
            ya, yb = y[a], y[b]
            if b < a:
                yb = yb + period
            va, vb = w[a], w[b]
            slope = abs(vb - va) / (yb - ya)
            if slope <= slope_floor:
                simple = False
            if b < a:
                crossings.extend([-grid.length, grid.length])
                continue
            crossings.append(float(ya + (yb - ya) * va / (va - vb)))
        count = self._seam_count(changes)
        return ZeroStructure(count=count, simple=simple, crossings=tuple(sorted(crossings)),
                             degenerate=(count % 2 == 0))

    def lap_sequence(self, traj: Trajectory) -> list[int]:
        return [self.lap_number(state).count for state in traj.states]

    def _reflection_matrix(self, grid: Grid, a: float) -> np.ndarray:
        y = self.circle_points(grid)
        k = grid.wavenumbers
        return np.sin(np.outer(2.0 * a - y, k)) - np.sin(np.outer(y, k))

    # ------------------------------------------------------------------
    # auditoria de Angenent
    # ------------------------------------------------------------------

    def angenent_audit(self, traj1: Trajectory, traj2: Trajectory | None = None,
                       reflection: float | None = None) -> LapAudit:
        """Sequência de lap numbers de w(t) = traj1 − traj2 (ou ρ_a traj1 − traj1) e seus aumentos"""
        if (traj2 is None) == (reflection is None):
            raise ValueError("Informe traj2 ou reflection (exatamente um)")
        grid = traj1.grid
        if traj2 is not None:
            if traj2.grid != grid or len(traj2) != len(traj1) or not np.allclose(traj2.times, traj1.times,
                                                                                   rtol=0, atol=1e-9):
                raise ValueError("Trajetórias com grids ou tempos diferentes")
            diffs = traj1.values - traj2.values
            scale = max(1.0, float(np.max(np.abs(traj1.values))))
            circles = None
        else:
            coeffs = spectral_service.forward_values(traj1.values)
            circles = coeffs @ self._reflection_matrix(grid, reflection).T
            diffs = circles
            scale = max(1.0, float(np.max(np.abs(traj1.values))))

        zero_floor = settings.ZERO_SUP_NORM * scale
        sups = np.max(np.abs(diffs), axis=1)
        if np.all(sups < zero_floor):
            return LapAudit(times=traj1.times, laps=tuple(0 for _ in traj1.times), violations=(),
                            identically_zero=True, degenerate_times=tuple(float(t) for t in traj1.times))

        laps = []
        degenerate = []
        for row, sup, t in zip(diffs, sups, traj1.times):
            if sup < zero_floor:
                laps.append(0)
                degenerate.append(float(t))
                continue
            if circles is None:
                zs = self.lap_number(Field(grid, row))
                if zs.degenerate:
                    degenerate.append(float(t))
                laps.append(zs.count)
            else:
                laps.append(self.circle_sign_changes(row))

        violations = []
        previous = None
        for lap, t in zip(laps, traj1.times):
            if float(t) in degenerate:
                continue
            if previous is not None and lap > previous:
                violations.append((float(t), previous, lap))
            previous = lap
        if violations:
            logger.warning(f"Lap number aumentou em {len(violations)} instantes (primeiro em t={violations[0][0]})")
        return LapAudit(times=traj1.times, laps=tuple(laps), violations=tuple(violations),
                        identically_zero=False, degenerate_times=tuple(degenerate))

    def refinement_agreement(self, u_a: Field, u_b: Field, s: float, t: float, forcing: Forcing,
                             cfg: SolverConfig, refined: Grid, reflection: float | None = None) -> dict:
        """Auditoria no grid de u_a e no grid refinado; conta discordâncias das sequências"""
        def audit(grid: Grid) -> LapAudit:
            a = spectral_service.resample(u_a, grid)
            traj1 = evolution_service.evolve(a, s, t, forcing, cfg)
            if reflection is not None:
                return self.angenent_audit(traj1, reflection=reflection)
            b = spectral_service.resample(u_b, grid)
            return self.angenent_audit(traj1, evolution_service.evolve(b, s, t, forcing, cfg))

        coarse = audit(u_a.grid)
        fine = audit(refined)
        disagreements = sum(1 for x, y in zip(coarse.laps, fine.laps) if x != y)
        return {
            'coarse': coarse,
            'fine': fine,
            'disagreements': disagreements,
            'agree': disagreements == 0,
        }

    # ------------------------------------------------------------------
    # classes 𝔉_m^±
    # ------------------------------------------------------------------

    def oscillation_defects(self, f: Field, m: int) -> tuple[float, float]:
        """(defeito 𝔉_m^+, defeito 𝔉_m^−): periodicidade, reflexão e monotonicidade"""
        grid = f.grid
        coeffs = spectral_service.forward_values(f.values)
        energy = float(np.sum(coeffs ** 2))
        n = np.arange(1, grid.n_modes + 1)
        periodicity = math.sqrt(float(np.sum(coeffs[n % m != 0] ** 2)) / energy)
        q_even = (n % m == 0) & ((n // m) % 2 == 0)
        reflection = math.sqrt(float(np.sum(coeffs[q_even] ** 2)) / energy)

        half = grid.length / (2 * m)
        x = np.linspace(-half, half, _MONO_SAMPLES + 2)[1:-1]
        d = spectral_service.derivative_at(f, x)
        scale = float(np.max(np.abs(d)))
        if scale == 0.0:
            return 1.0, 1.0
        mono_plus = max(0.0, -float(np.min(d))) / scale
        mono_minus = max(0.0, float(np.max(d))) / scale
        return max(periodicity, reflection, mono_plus), max(periodicity, reflection, mono_minus)

    def classify_oscillation(self, f: Field) -> OscillationClass:
        """Melhor m ≤ m_max com defeito abaixo do limiar; zero quando degenerado"""
        if f.sup_norm < settings.ZERO_SUP_NORM:
            return OscillationClass(kind=OscillationKind.ZERO, m=0, defect=0.0)
        threshold = settings.CLASSIFY_THRESHOLD
        best = None
        worst_defect = math.inf
        for m in range(1, min(settings.M_MAX, f.grid.n_modes) + 1):
            plus, minus = self.oscillation_defects(f, m)
            for kind, defect in ((OscillationKind.F_M_PLUS, plus), (OscillationKind.F_M_MINUS, minus)):
                worst_defect = min(worst_defect, defect)
                if defect < threshold and (best is None or defect < best.defect):
                    best = OscillationClass(kind=kind, m=m, defect=defect)
        if best is None:
            return OscillationClass(kind=OscillationKind.UNCLASSIFIED, m=0, defect=worst_defect)
        return best

    # ------------------------------------------------------------------
    # faixas Y_j^± e zeros fixos
    # ------------------------------------------------------------------

    def strip_membership(self, f: Field, j: int, sign: Sign | str, eq_lo: Equilibrium,
                         eq_hi: Equilibrium) -> tuple[bool, float]:
        """min(φ_lo, φ_hi) ≤ f ≤ max(φ_lo, φ_hi) com folga configurada"""
        sign = Sign.parse(sign)
        for e in (eq_lo, eq_hi):
            if e.j != j or e.sign is not sign:
                raise ValueError(f"Equilíbrio {e.label} não corresponde a j={j}, sinal {sign.value}")
        lo = np.minimum(eq_lo.profile.values, eq_hi.profile.values)
        hi = np.maximum(eq_lo.profile.values, eq_hi.profile.values)
        violation = max(0.0, float(np.max(lo - f.values)), float(np.max(f.values - hi)))
        return violation <= settings.STRIP_SLACK, violation

    def pinned_zero_defect(self, f: Field, j: int) -> float:
        """Distância máxima dos zeros interiores a kL/j (infinito se a contagem difere)"""
        if j <= 1:
            return 0.0
        zeros = spectral_service.locate_zeros(f)
        expected = [k * f.grid.length / j for k in range(1, j)]
        if len(zeros) != len(expected):
            return math.inf
        return max(abs(z - e) for z, e in zip(zeros, expected))

    # ------------------------------------------------------------------
    # conjuntos limite
    # ------------------------------------------------------------------

    def estimate_limit_set(self, traj: Trajectory, direction: LimitDirection | str,
                           sample_count: int) -> LimitSetEstimate:
        """Classifica snapshots finais (ω) ou iniciais (α) e tenta faixa e hull"""
        direction = LimitDirection(direction)
        if sample_count < 1 or sample_count > len(traj):
            raise ValueError(f"sample_count {sample_count} fora de 1..{len(traj)}")
        if direction is LimitDirection.OMEGA:
            idx = range(len(traj) - sample_count, len(traj))
            span = traj.times[-1] - traj.times[len(traj) - sample_count]
            if span < 5.0:
                raise ValueError(f"Amostras ω cobrem {span:.3g} < 5 unidades de tempo")
        else:
            if traj.origin not in ('pullback', 'connection'):
                raise ValueError("Limite α só em soluções globais construídas (pullback ou conexão)")
            idx = range(0, sample_count)
        snapshots = tuple(traj.states[i] for i in idx)
        times = np.array([traj.times[i] for i in idx])
        classes = tuple(self.classify_oscillation(s) for s in snapshots)
        distinct = {(c.kind, c.m) for c in classes}
        mixed = len(distinct) > 1
        anchor = classes[-1] if direction is LimitDirection.OMEGA else classes[0]
        if mixed:
            logger.warning(f"Classificação mista no limite {direction.value}: {sorted(c.label for c in classes)}")
            classification = anchor
        else:
            classification = OscillationClass(kind=anchor.kind, m=anchor.m, defect=max(c.defect for c in classes))

        strip = None
        strip_violation = None
        matched = ()
        if classification.kind in (OscillationKind.F_M_PLUS, OscillationKind.F_M_MINUS):
            m = classification.m
            sign = Sign.PLUS if classification.kind is OscillationKind.F_M_PLUS else Sign.MINUS
            lam = traj.config.lam
            grid = traj.grid
            try:
                eq_lo = equilibria_service.solve_equilibrium(lam, traj.forcing.beta2, m, sign, grid)
                eq_hi = equilibria_service.solve_equilibrium(lam, traj.forcing.beta1, m, sign, grid)
                strip_violation = max(self.strip_membership(s, m, sign, eq_lo, eq_hi)[1] for s in snapshots)
                if strip_violation <= settings.STRIP_SLACK:
                    strip = (m, sign)
                matched = self._match_hull(traj, snapshots, m, sign, direction)
            except NoSuchEquilibrium:
                logger.warning(f"Sem equilíbrio φ_{m} em λ={lam} para a faixa do limite {direction.value}")

        return LimitSetEstimate(direction=direction, times=times, snapshots=snapshots,
                                classification=classification, snapshot_classes=classes, mixed=mixed,
                                strip=strip, strip_violation=strip_violation, matched_hull_equilibria=matched)

    def _match_hull(self, traj: Trajectory, snapshots: tuple[Field, ...], m: int, sign: Sign,
                    direction: LimitDirection) -> tuple[tuple[str, float], ...]:
        from app.services.pullback_service import pullback_service

        hull_direction = Direction.PLUS if direction is LimitDirection.OMEGA else Direction.MINUS
        limit = forcing_service.limit(traj.forcing, hull_direction)
        if limit is None:
            return ()
        cfg = traj.config.with_(mode_stride=1)
        xi = pullback_service.pullback_equilibrium(m, sign, cfg.lam, limit, (0.0, 0.0), grid=traj.grid, cfg=cfg)
        target = xi.states[-1]
        description = f"xi_{m}_{sign.word} gamma=constant({limit.beta0:g})"
        return tuple((description, (s - target).sup_norm) for s in snapshots)

    # ------------------------------------------------------------------
    # decomposição de Morse
    # ------------------------------------------------------------------

    def morse_inventory(self, lam: float, grid: Grid | None = None) -> list[tuple[str, str]]:
        """Z_{2j−1} = ξ_j^+, Z_{2j} = ξ_j^−, Z_{2N+1} = {0}"""
        n = equilibria_service.mode_count(lam, grid)
        inventory = []
        for j in range(1, n + 1):
            inventory.append((f"Z_{2 * j - 1}", f"xi_{j}_plus"))
            inventory.append((f"Z_{2 * j}", f"xi_{j}_minus"))
        inventory.append((f"Z_{2 * n + 1}", 'zero'))
        return inventory

    def morse_label(self, classification: OscillationClass, lam: float, grid: Grid | None = None) -> tuple[str, str] | None:
        """Conjunto de Morse de um limite classificado (None se fora do inventário)"""
        inventory = dict((label, z) for z, label in self.morse_inventory(lam, grid))
        if classification.kind is OscillationKind.ZERO:
            label = 'zero'
        elif classification.kind is OscillationKind.F_M_PLUS:
            label = f"xi_{classification.m}_plus"
        elif classification.kind is OscillationKind.F_M_MINUS:
            label = f"xi_{classification.m}_minus"
        else:
            return None
        if label not in inventory:
            return None
        return inventory[label], label


structure_service = StructureService()
