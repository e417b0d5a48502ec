"""
Serviço do coeficiente β(t): avaliação, translações e amostras de hull
"""

import logging
import math
from dataclasses import replace

import numpy as np

from app.extensions import settings
from app.models import Direction, Forcing, ForcingKind, HullSample

logger = logging.getLogger(__name__)


class ForcingService:
    """Famílias fechadas de β(t) com limites certificados"""

    def build(self, kind: str | ForcingKind, beta0: float, **params) -> Forcing:
        """Cria um Forcing a partir de parâmetros nomeados (None é ignorado)"""
        clean = {k: float(v) for k, v in params.items() if v is not None}
        return Forcing(kind=ForcingKind(kind), beta0=float(beta0), **clean)

    def constant(self, beta: float) -> Forcing:
        return Forcing(kind=ForcingKind.CONSTANT, beta0=float(beta))

    def eval(self, f: Forcing, t: float) -> float:
        tau = t
        for s in reversed(f.shifts):
            tau = tau + s
        return self._base(f, tau)

    def eval_many(self, f: Forcing, t: np.ndarray) -> np.ndarray:
        tau = np.asarray(t, dtype=float)
        for s in reversed(f.shifts):
            tau = tau + s
        if f.kind is ForcingKind.CONSTANT:
            return np.full_like(tau, f.beta0)
        if f.kind is ForcingKind.SINUSOIDAL:
            return f.beta0 + f.amplitude * np.sin(f.omega * tau)
        if f.kind is ForcingKind.ASYMPTOTICALLY_AUTONOMOUS:
            return f.beta0 + f.amplitude * np.tanh(f.omega * tau)
        return f.beta0 + f.amplitude * np.sin(f.omega * tau) + f.amplitude2 * np.sin(f.omega2 * tau)

    def _base(self, f: Forcing, tau: float) -> float:
        if f.kind is ForcingKind.CONSTANT:
            return f.beta0
        if f.kind is ForcingKind.SINUSOIDAL:
            return f.beta0 + f.amplitude * math.sin(f.omega * tau)
        if f.kind is ForcingKind.ASYMPTOTICALLY_AUTONOMOUS:
            return f.beta0 + f.amplitude * math.tanh(f.omega * tau)
        return f.beta0 + f.amplitude * math.sin(f.omega * tau) + f.amplitude2 * math.sin(f.omega2 * tau)

    def translate(self, f: Forcing, s: float) -> Forcing:
        """β(·+s); limites declarados preservados"""
        return replace(f, shifts=f.shifts + (float(s),))

    def period(self, f: Forcing) -> float | None:
        if f.kind is ForcingKind.SINUSOIDAL:
            return 2.0 * math.pi / f.omega
        return None

    def limit(self, f: Forcing, direction: Direction) -> Forcing | None:
        """Limite fechado de β(·+t) quando t → ±∞, se existir"""
        if f.kind is ForcingKind.CONSTANT:
            return f
        if f.kind is ForcingKind.ASYMPTOTICALLY_AUTONOMOUS:
            side = direction.factor * (1 if f.omega > 0 else -1)
            return self.constant(f.beta0 + side * f.amplitude)
        return None

    def hull_sample(self, f: Forcing, direction: Direction | str, k: int) -> HullSample:
        """k translações ao longo da sequência de escape configurada"""
        if k < 1:
            raise ValueError(f"hull_sample exige k >= 1 (recebido {k})")
        direction = Direction(direction)
        sign = direction.factor
        period = self.period(f)
        if period is not None:
            offsets = tuple(sign * i * period / k for i in range(k))
        else:
            start = settings.HULL_ESCAPE_START
            offsets = tuple(sign * start * 2.0 ** i for i in range(k))
        translates = tuple(self.translate(f, s) for s in offsets)
        logger.debug(f"Hull {direction.value} de {f.kind.value}: {k} translações")
        return HullSample(direction=direction, offsets=offsets, translates=translates,
                          limit=self.limit(f, direction))

    def sup_distance(self, f: Forcing, g: Forcing, start: float, end: float, samples: int = 2001) -> float:
        t = np.linspace(start, end, samples)
        return float(np.max(np.abs(self.eval_many(f, t) - self.eval_many(g, t))))

    def certify_bounds(self, f: Forcing, start: float, end: float, samples: int = 10_000) -> dict:
        """Verificação amostral de beta1 ≤ β(t) ≤ beta2 no horizonte dado"""
        t = np.linspace(start, end, samples)
        values = self.eval_many(f, t)
        lo, hi = float(values.min()), float(values.max())
        inside = lo >= f.beta1 and hi <= f.beta2
        if not inside:
            logger.warning(f"β fora dos limites declarados em [{start}, {end}]: [{lo}, {hi}] vs [{f.beta1}, {f.beta2}]")
        return {'samples': samples, 'min': lo, 'max': hi, 'beta1': f.beta1, 'beta2': f.beta2, 'inside': inside}

    def describe(self, f: Forcing) -> dict:
        return {
            'kind': f.kind.value,
            'beta0': f.beta0,
            'amplitude': f.amplitude,
            'omega': f.omega,
            'amplitude2': f.amplitude2,
            'omega2': f.omega2,
            'beta1': f.beta1,
            'beta2': f.beta2,
            'shifts': list(f.shifts),
        }

    def from_description(self, data: dict) -> Forcing:
        return Forcing(
            kind=ForcingKind(data['kind']),
            beta0=float(data['beta0']),
            amplitude=float(data.get('amplitude', 0.0)),
            omega=float(data.get('omega', 1.0)),
            amplitude2=float(data.get('amplitude2', 0.0)),
            omega2=float(data.get('omega2', math.sqrt(2.0))),
            beta1=data.get('beta1'),
            beta2=data.get('beta2'),
            shifts=tuple(data.get('shifts', ())),
        )


forcing_service = ForcingService()
