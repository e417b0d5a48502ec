"""
Serviço de equilíbrios autônomos φ'' + λφ − βφ³ = 0 (shooting em φ'(0))
"""

import logging
import math
import threading
from dataclasses import replace

import numpy as np
from cachetools import cached
from cachetools.keys import hashkey
from scipy import linalg

from app.errors import BifurcationValueError, NoSuchEquilibrium, NonConvergence
from app.extensions import equilibrium_cache, operator_cache, settings
from app.models import Equilibrium, Field, Grid, Sign
from app.services.spectral_service import spectral_service

logger = logging.getLogger(__name__)

_cache_lock = threading.Lock()
_operator_lock = threading.Lock()

NEWTON_MAX_ITER = 8


@cached(cache=operator_cache, key=lambda n_modes, length: hashkey(n_modes, length), lock=_operator_lock)
def second_derivative_matrix(n_modes: int, length: float) -> np.ndarray:
    """Matriz densa de f ↦ f'' espectral no grid (DST-I, −k², DST-I inversa)"""
    k = np.arange(1, n_modes + 1) * (math.pi / length)
    columns = spectral_service.inverse_values(-(k ** 2) * spectral_service.forward_values(np.eye(n_modes)))
    matrix = np.ascontiguousarray(columns.T)
    matrix.setflags(write=False)
    return matrix


def _shoot(p: float, lam: float, beta: float, length: float, steps: int,
           record_every: int = 0) -> tuple[int, float, list[float], float]:
    """RK4 de passo fixo para y' = v, v' = −λy + βy³, y(0)=0, y'(0)=p.

    Devolve (mudanças de sinal em (0, L], y(L), amostras a cada record_every passos,
    desvio relativo máximo da energia). Contagem −1 quando a órbita passa da separatriz.
    """
    h = length / steps
    half = 0.5 * h
    sixth = h / 6.0
    escape = 1.5 * math.sqrt(lam / beta)
    y, v = 0.0, p
    energy0 = 0.5 * p * p
    drift = 0.0
    count = 0
    samples: list[float] = []
    for i in range(1, steps + 1):
        k1y, k1v = v, -lam * y + beta * y * y * y
        y2, v2 = y + half * k1y, v + half * k1v
        k2y, k2v = v2, -lam * y2 + beta * y2 * y2 * y2
        y3, v3 = y + half * k2y, v + half * k2v
        k3y, k3v = v3, -lam * y3 + beta * y3 * y3 * y3
        y4, v4 = y + h * k3y, v + h * k3v
        k4y, k4v = v4, -lam * y4 + beta * y4 * y4 * y4
        y_new = y + sixth * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        v = v + sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if (y_new > 0.0 > y) or (y_new < 0.0 < y) or (y_new == 0.0 and y != 0.0):
            count += 1
        y = y_new
        if abs(y) > escape:
            return -1, y, samples, math.inf
        if record_every:
            if i % record_every == 0:
                samples.append(y)
            energy = 0.5 * v * v + 0.5 * lam * y * y - 0.25 * beta * y * y * y * y
            drift = max(drift, abs(energy - energy0))
    return count, y, samples, drift / energy0 if energy0 > 0 else 0.0


class EquilibriaService:
    """Família {φ_0, φ_{j,β}^±} e verificações associadas"""

    def default_grid(self) -> Grid:
        return Grid(settings.N_MODES)

    def shooting_steps(self, grid: Grid) -> int:
        """Passos RK4 múltiplos de n_modes+1 (pontos do grid caem na malha do RK)"""
        cells = grid.n_modes + 1
        return cells * math.ceil(settings.SHOOTING_STEPS / cells)

    def residual(self, profile: Field, lam: float, beta: float) -> float:
        """||φ'' + λφ − βφ³||_sup com φ'' espectral"""
        d2 = spectral_service.second_derivative(profile).values
        v = profile.values
        return float(np.max(np.abs(d2 + lam * v - beta * v ** 3))) if len(v) else 0.0

    def polish(self, profile: Field, lam: float, beta: float) -> tuple[Field, list[float]]:
        """Newton no problema discreto D²φ + λφ − βφ³ = 0, partindo do perfil amostrado do shooting.

        Devolve o perfil refinado e a sequência de resíduos espectrais (o primeiro é o do shooting).
        """
        grid = profile.grid
        d2 = second_derivative_matrix(grid.n_modes, grid.length)
        v = profile.values.copy()
        residuals = [self.residual(profile, lam, beta)]
        target = 1e-2 * settings.RESIDUAL_TOL
        for _ in range(NEWTON_MAX_ITER):
            if residuals[-1] < target:
                break
            f = d2 @ v + lam * v - beta * v ** 3
            jac = d2 + np.diag(lam - 3.0 * beta * v ** 2)
            step = linalg.solve(jac, f, check_finite=False)
            candidate = v - step
            r = self.residual(Field(grid, candidate), lam, beta)
            if r >= residuals[-1]:
                break
            v = candidate
            residuals.append(r)
        return Field(grid, v), residuals

    def trivial(self, lam: float, beta: float, grid: Grid) -> Equilibrium:
        return Equilibrium(j=0, sign=Sign.NONE, lam=lam, beta=beta, profile=Field(grid, np.zeros(grid.n_modes)),
                           slope_at_0=0.0, zeros=(), residual=0.0)

    def _bracket(self, lam: float, beta: float, j: int, grid: Grid, steps: int) -> tuple[float, float, int]:
        k = j * math.pi / grid.length
        p_sep = lam / math.sqrt(2.0 * beta)
        m0 = math.sqrt(4.0 * (lam - k * k) / (3.0 * beta))
        p0 = min(k * m0, 0.5 * p_sep)
        iterations = 0
        max_iter = settings.SHOOTING_MAX_ITER

        def too_small(p: float) -> bool:
            return _shoot(p, lam, beta, grid.length, steps)[0] >= j

        lo = p0
        while not too_small(lo):
            lo *= 0.5
            iterations += 1
            if iterations > max_iter:
                raise NonConvergence(f"Sem bracket inferior para j={j}, λ={lam}", history=[('lo', lo)])
        hi = p0
        while too_small(hi):
            hi = min(2.0 * hi, p_sep)
            iterations += 1
            if iterations > max_iter or (hi == p_sep and too_small(hi)):
                raise NonConvergence(f"Sem bracket superior para j={j}, λ={lam}", history=[('hi', hi)])
        return lo, hi, iterations

    def _solve_plus(self, lam: float, beta: float, j: int, grid: Grid) -> Equilibrium:
        steps = self.shooting_steps(grid)
        lo, hi, iterations = self._bracket(lam, beta, j, grid, steps)
        history = []
        while hi - lo > 4.0 * math.ulp(hi):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if _shoot(mid, lam, beta, grid.length, steps)[0] >= j:
                lo = mid
            else:
                hi = mid
            iterations += 1
            history.append((mid, hi - lo))
            if iterations > settings.SHOOTING_MAX_ITER:
                raise NonConvergence(f"Bissecção não convergiu para j={j}, λ={lam}", history=history)

        end_lo = abs(_shoot(lo, lam, beta, grid.length, steps)[1])
        end_hi = abs(_shoot(hi, lam, beta, grid.length, steps)[1])
        p = lo if end_lo <= end_hi else hi
        record_every = steps // (grid.n_modes + 1)
        _, _, samples, _ = _shoot(p, lam, beta, grid.length, steps, record_every=record_every)
        profile, residuals = self.polish(Field(grid, np.array(samples[:grid.n_modes])), lam, beta)
        residual = residuals[-1]
        if residual >= settings.RESIDUAL_TOL:
            raise NonConvergence(
                f"Resíduo {residual:.2e} acima de {settings.RESIDUAL_TOL:g} após Newton para j={j}, λ={lam}",
                history=[(k, r) for k, r in enumerate(residuals)],
            )
        zeros = spectral_service.locate_zeros(profile)
        logger.info(
            f"Equilíbrio j={j} λ={lam} β={beta}: φ'(0)={p:.12g}, resíduo {residuals[0]:.2e} → {residual:.2e}, "
            f"{iterations} iterações"
        )
        return Equilibrium(j=j, sign=Sign.PLUS, lam=lam, beta=beta, profile=profile,
                           slope_at_0=p, zeros=zeros, residual=residual)

    def solve_equilibrium(self, lam: float, beta: float, j: int, sign: Sign | str = Sign.PLUS,
                          grid: Grid | None = None) -> Equilibrium:
        """φ_{j,β}^± por shooting; j = 0 é a solução trivial"""
        grid = grid or self.default_grid()
        sign = Sign.parse(sign)
        if beta <= 0:
            raise ValueError(f"β deve ser positivo: {beta}")
        if j == 0:
            return self.trivial(lam, beta, grid)
        if j < 0:
            raise ValueError(f"j deve ser >= 0: {j}")
        k = j * math.pi / grid.length
        if lam <= k * k:
            raise NoSuchEquilibrium(f"Não existe φ_{j} para λ={lam} (precisa λ > {k * k:g})")
        if sign is Sign.NONE:
            raise ValueError("Equilíbrios com j >= 1 exigem sinal + ou -")

        key = (float(lam), float(beta), j, grid.n_modes, grid.length, self.shooting_steps(grid))
        with _cache_lock:
            plus = equilibrium_cache.get(key)
        if plus is None:
            try:
                plus = self._solve_plus(lam, beta, j, grid)
            except Exception as e:
                logger.error(f"Erro ao resolver equilíbrio j={j}, λ={lam}, β={beta}: {str(e)}", exc_info=True)
                raise
            with _cache_lock:
                equilibrium_cache[key] = plus
        return plus if sign is Sign.PLUS else self.negate(plus)

    def negate(self, e: Equilibrium) -> Equilibrium:
        flipped = {Sign.PLUS: Sign.MINUS, Sign.MINUS: Sign.PLUS, Sign.NONE: Sign.NONE}[e.sign]
        return replace(e, sign=flipped, profile=-e.profile, slope_at_0=-e.slope_at_0)

    def rescale(self, e: Equilibrium, beta_new: float) -> Equilibrium:
        """φ_{j,β_new} = sqrt(β/β_new)·φ_{j,β}, sem novo shooting"""
        if beta_new <= 0:
            raise ValueError(f"β deve ser positivo: {beta_new}")
        if beta_new == e.beta:
            return e
        factor = math.sqrt(e.beta / beta_new)
        profile = e.profile.scaled(factor)
        return replace(e, beta=beta_new, profile=profile, slope_at_0=factor * e.slope_at_0,
                       residual=self.residual(profile, e.lam, beta_new))

    def is_bifurcation_value(self, lam: float) -> bool:
        return lam >= 1 and float(lam).is_integer() and math.isqrt(int(lam)) ** 2 == int(lam)

    def mode_count(self, lam: float, grid: Grid | None = None) -> int:
        """Maior j com (jπ/L)² < λ"""
        grid = grid or self.default_grid()
        scale = math.pi / grid.length
        n = 0
        while ((n + 1) * scale) ** 2 < lam:
            n += 1
        return n

    def enumerate_equilibria(self, lam: float, beta: float, grid: Grid | None = None) -> list[Equilibrium]:
        """φ_0 e φ_{j,β}^± para 1 ≤ j ≤ n, λ ∈ (n², (n+1)²): 2n+1 equilíbrios"""
        grid = grid or self.default_grid()
        if self.is_bifurcation_value(lam):
            raise BifurcationValueError(f"λ={lam} é ponto de bifurcação (quadrado exato)")
        family = [self.trivial(lam, beta, grid)]
        for j in range(1, self.mode_count(lam, grid) + 1):
            plus = self.solve_equilibrium(lam, beta, j, Sign.PLUS, grid)
            family.extend([plus, self.negate(plus)])
        logger.info(f"λ={lam}, β={beta}: {len(family)} equilíbrios")
        return family

    def interval_grid(self, grid: Grid, j: int) -> Grid:
        return Grid(max(grid.n_modes // j, 1), length=grid.length / j)

    def glue(self, interval_profile: Field, j: int, grid: Grid) -> Field:
        """Reflexão ímpar de um perfil em [0, L/j] para [0, L]: modo m ↦ modo j·m"""
        coeffs = spectral_service.forward_values(interval_profile.values)
        full = np.zeros(grid.n_modes)
        m = min(len(coeffs), grid.n_modes // j)
        full[j - 1:j * m:j] = coeffs[:m]
        return Field(grid, spectral_service.inverse_values(full))

    def glue_check(self, e_fine: Equilibrium, j: int) -> float:
        """sup-distância entre φ_j^+ em [0, π/j] e o perfil de uma corcova do problema no intervalo"""
        if j <= 1:
            return 0.0
        if e_fine.j != j:
            raise ValueError(f"glue_check exige o equilíbrio do modo {j} (recebido j={e_fine.j})")
        plus = e_fine if e_fine.sign is not Sign.MINUS else self.negate(e_fine)
        sub = self.interval_grid(plus.profile.grid, j)
        hump = self.solve_equilibrium(plus.lam, plus.beta, 1, Sign.PLUS, sub)
        restricted = spectral_service.evaluate(plus.profile, sub.points)
        return float(np.max(np.abs(restricted - hump.profile.values)))

    def energy_drift(self, e: Equilibrium) -> float:
        """Desvio relativo máximo de ½φ'² + ½λφ² − ¼βφ⁴ ao longo do shooting"""
        if e.j == 0:
            return 0.0
        grid = e.profile.grid
        steps = self.shooting_steps(grid)
        _, _, _, drift = _shoot(abs(e.slope_at_0), e.lam, e.beta, grid.length, steps, record_every=steps)
        return drift

    def amplitude_slope_defect(self, e: Equilibrium) -> float:
        """|p² − (λM² − βM⁴/2)| relativo, com M = φ no meio do primeiro lóbulo"""
        if e.j == 0:
            return 0.0
        crest = e.profile.grid.length / (2 * e.j)
        m = abs(float(spectral_service.evaluate(e.profile, [crest])[0]))
        p2 = e.slope_at_0 ** 2
        return abs(p2 - (e.lam * m * m - 0.5 * e.beta * m ** 4)) / p2

    def pitchfork_amplitudes(self, j: int, beta: float = 1.0, deltas: tuple[float, ...] = (0.1, 0.01, 0.001),
                             grid: Grid | None = None) -> list[float]:
        """Amplitudes sup de φ_{j,β}^+ em λ = j² + δ"""
        grid = grid or self.default_grid()
        return [self.solve_equilibrium(j * j + d, beta, j, Sign.PLUS, grid).profile.sup_norm for d in deltas]


equilibria_service = EquilibriaService()
