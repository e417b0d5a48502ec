"""
Serviço de primitivas espectrais: transformadas seno, normas e avaliação de séries
"""

import logging
import math
from typing import Iterable

import numpy as np
from scipy import fft
from scipy.optimize import brentq

from app.models import Field, Grid, Norms, SpectralField

logger = logging.getLogger(__name__)


class SpectralService:
    """Transformadas DST-I e operações na base de senos sin(k_n x), k_n = nπ/L"""

    # ------------------------------------------------------------------
    # transformadas
    # ------------------------------------------------------------------

    def forward_values(self, values: np.ndarray, workers: int = 1) -> np.ndarray:
        """Valores interiores → coeficientes (último eixo)"""
        n = values.shape[-1]
        return fft.dst(values, type=1, axis=-1, workers=workers) / (n + 1)

    def inverse_values(self, coeffs: np.ndarray, workers: int = 1) -> np.ndarray:
        """Coeficientes → valores interiores (último eixo)"""
        return fft.dst(coeffs, type=1, axis=-1, workers=workers) / 2.0

    def dst_forward(self, f: Field) -> SpectralField:
        return SpectralField(f.grid, self.forward_values(f.values))

    def dst_inverse(self, s: SpectralField) -> Field:
        return Field(s.grid, self.inverse_values(s.coeffs))

    # ------------------------------------------------------------------
    # normas
    # ------------------------------------------------------------------

    def norms(self, f: Field) -> Norms:
        """(sup, L², seminorma H¹); as duas últimas pela identidade de Parseval"""
        coeffs = self.forward_values(f.values)
        half_length = f.grid.length / 2.0
        sup = float(np.max(np.abs(f.values)))
        l2 = math.sqrt(half_length * float(np.sum(coeffs ** 2)))
        h1 = math.sqrt(half_length * float(np.sum((f.grid.wavenumbers * coeffs) ** 2)))
        return Norms(sup, l2, h1)

    def h1_distances(self, grid: Grid, values_a: np.ndarray, values_b: np.ndarray) -> np.ndarray:
        """Distâncias H¹ linha a linha entre dois blocos de snapshots"""
        coeffs = self.forward_values(np.atleast_2d(values_a - values_b))
        return np.sqrt(grid.length / 2.0 * np.sum((grid.wavenumbers * coeffs) ** 2, axis=-1))

    # ------------------------------------------------------------------
    # construção de campos
    # ------------------------------------------------------------------

    def from_modes(self, grid: Grid, modes: dict[int, float] | Iterable[tuple[int, float]]) -> Field:
        """Campo Σ a_n sin(k_n x) a partir de {n: a_n}"""
        items = modes.items() if isinstance(modes, dict) else modes
        coeffs = np.zeros(grid.n_modes)
        for n, amp in items:
            if not 1 <= n <= grid.n_modes:
                raise ValueError(f"Modo {n} fora de 1..{grid.n_modes}")
            coeffs[n - 1] += amp
        return Field(grid, self.inverse_values(coeffs))

    def project_stride(self, coeffs: np.ndarray, stride: int) -> np.ndarray:
        """Mantém apenas os modos múltiplos de stride"""
        if stride <= 1:
            return coeffs
        out = np.zeros_like(coeffs)
        out[..., stride - 1::stride] = coeffs[..., stride - 1::stride]
        return out

    def detect_stride(self, coeffs: np.ndarray, rel_tol: float = 1e-12) -> int:
        """Maior j tal que só os modos múltiplos de j são significativos (1 se nenhum subespaço)"""
        coeffs = np.asarray(coeffs)
        scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
        if scale == 0.0:
            return 1
        active = np.flatnonzero(np.abs(coeffs) > rel_tol * scale) + 1
        return int(np.gcd.reduce(active))

    def resample(self, f: Field, grid: Grid) -> Field:
        """Interpolação espectral para outro grid de mesmo comprimento"""
        if not math.isclose(f.grid.length, grid.length, rel_tol=1e-14):
            raise ValueError("resample exige grids de mesmo comprimento")
        coeffs = self.forward_values(f.values)
        out = np.zeros(grid.n_modes)
        m = min(grid.n_modes, f.grid.n_modes)
        out[:m] = coeffs[:m]
        return Field(grid, self.inverse_values(out))

    # ------------------------------------------------------------------
    # avaliação da série
    # ------------------------------------------------------------------

    def evaluate(self, f: Field, x: np.ndarray) -> np.ndarray:
        """Série de senos em pontos arbitrários (extensão ímpar 2L-periódica)"""
        coeffs = self.forward_values(f.values)
        return self.evaluate_coeffs(f.grid, coeffs, x)

    def evaluate_coeffs(self, grid: Grid, coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.sin(np.outer(x, grid.wavenumbers)) @ coeffs

    def derivative_at(self, f: Field, x: np.ndarray) -> np.ndarray:
        coeffs = self.forward_values(f.values)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = f.grid.wavenumbers
        return np.cos(np.outer(x, k)) @ (k * coeffs)

    def second_derivative(self, f: Field) -> Field:
        coeffs = self.forward_values(f.values)
        return Field(f.grid, self.inverse_values(-(f.grid.wavenumbers ** 2) * coeffs))

    # ------------------------------------------------------------------
    # zeros
    # ------------------------------------------------------------------

    def sign_pattern(self, values: np.ndarray, threshold: float) -> np.ndarray:
        """+1/-1 fora da faixa de histerese, 0 dentro"""
        signs = np.sign(values).astype(int)
        signs[np.abs(values) < threshold] = 0
        return signs

    def locate_zeros(self, f: Field, rel_threshold: float = 1e-9) -> tuple[float, ...]:
        """Zeros interiores: mudanças de sinal no grid refinadas por brentq sobre a série"""
        sup = f.sup_norm
        if sup == 0.0:
            return ()
        coeffs = self.forward_values(f.values)
        pts = f.grid.points
        signs = self.sign_pattern(f.values, rel_threshold * sup)

        def series(x: float) -> float:
            return float(self.evaluate_coeffs(f.grid, coeffs, x)[0])

        zeros = []
        last_idx = None
        for i, s in enumerate(signs):
            if s == 0:
                continue
            if last_idx is not None and s != signs[last_idx]:
                a, b = pts[last_idx], pts[i]
                fa, fb = series(a), series(b)
                if fa * fb < 0:
                    zeros.append(brentq(series, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
                else:
                    zeros.append(0.5 * (a + b))
            last_idx = i
        return tuple(float(z) for z in zeros)


spectral_service = SpectralService()
