"""
Tipos de domínio do laboratório
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, NamedTuple

import numpy as np


class Sign(str, Enum):
    PLUS = '+'
    MINUS = '-'
    NONE = 'none'

    @property
    def factor(self) -> int:
        return {Sign.PLUS: 1, Sign.MINUS: -1, Sign.NONE: 0}[self]

    @property
    def word(self) -> str:
        return {Sign.PLUS: 'plus', Sign.MINUS: 'minus', Sign.NONE: 'none'}[self]

    @classmethod
    def parse(cls, value: 'str | Sign') -> 'Sign':
        if isinstance(value, Sign):
            return value
        aliases = {'+': cls.PLUS, 'plus': cls.PLUS, '-': cls.MINUS, 'minus': cls.MINUS, 'none': cls.NONE}
        try:
            return aliases[str(value).strip().lower()]
        except KeyError:
            raise ValueError(f"Sinal inválido: {value!r}")


class ForcingKind(str, Enum):
    CONSTANT = 'constant'
    SINUSOIDAL = 'sinusoidal'
    ASYMPTOTICALLY_AUTONOMOUS = 'asymptotically_autonomous'
    QUASIPERIODIC = 'quasiperiodic'


class Direction(str, Enum):
    PLUS = 'plus'
    MINUS = 'minus'

    @property
    def factor(self) -> int:
        return 1 if self is Direction.PLUS else -1


class LimitDirection(str, Enum):
    OMEGA = 'omega'
    ALPHA = 'alpha'


class Scheme(str, Enum):
    ETDRK4 = 'etdrk4'
    IMEX_BDF2 = 'imex_bdf2'

    @property
    def order(self) -> int:
        return 4 if self is Scheme.ETDRK4 else 2


class OscillationKind(str, Enum):
    F_M_PLUS = 'F_m_plus'
    F_M_MINUS = 'F_m_minus'
    ZERO = 'zero'
    UNCLASSIFIED = 'unclassified'


# ---------------------------------------------------------------------------
# core
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Grid interior uniforme de (0, L); x_k = kL/(n_modes+1)"""
    n_modes: int
    length: float = math.pi

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError(f"n_modes deve ser inteiro positivo: {self.n_modes}")
        if not self.length > 0:
            raise ValueError(f"Comprimento do intervalo deve ser positivo: {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / (self.n_modes + 1)

    @cached_property
    def points(self) -> np.ndarray:
        pts = self.spacing * np.arange(1, self.n_modes + 1)
        pts.setflags(write=False)
        return pts

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = np.arange(1, self.n_modes + 1) * (math.pi / self.length)
        k.setflags(write=False)
        return k


def _frozen_array(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Field:
    """Valores interiores de u(t,·); nas bordas o valor é 0 (Dirichlet)"""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.shape != (self.grid.n_modes,):
            raise ValueError(f"Field com {values.shape} valores para grid de {self.grid.n_modes} pontos")
        if not np.all(np.isfinite(values)):
            raise ValueError("Field com valores não finitos")
        object.__setattr__(self, 'values', values)

    def with_values(self, values: np.ndarray) -> 'Field':
        return Field(self.grid, values)

    def __neg__(self) -> 'Field':
        return Field(self.grid, -self.values)

    def __add__(self, other: 'Field') -> 'Field':
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: 'Field') -> 'Field':
        return Field(self.grid, self.values - other.values)

    def scaled(self, factor: float) -> 'Field':
        return Field(self.grid, factor * self.values)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coeficientes s_n de Σ s_n sin(k_n x)"""
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = _frozen_array(self.coeffs)
        if coeffs.shape != (self.grid.n_modes,):
            raise ValueError(f"SpectralField com {coeffs.shape} coeficientes para {self.grid.n_modes} modos")
        object.__setattr__(self, 'coeffs', coeffs)


class Norms(NamedTuple):
    sup_norm: float
    l2_norm: float
    h1_seminorm: float


# ---------------------------------------------------------------------------
# forcing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Forcing:
    """Coeficiente β(t) de forma fechada, com limites certificados beta1 ≤ β(t) ≤ beta2"""
    kind: ForcingKind
    beta0: float
    amplitude: float = 0.0
    omega: float = 1.0
    amplitude2: float = 0.0
    omega2: float = math.sqrt(2.0)
    beta1: float | None = None
    beta2: float | None = None
    shifts: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'kind', ForcingKind(self.kind))
        lo, hi = self.analytic_bounds
        if lo <= 0:
            raise ValueError(f"β precisa ser positivo; limite inferior analítico {lo}")
        beta1 = lo if self.beta1 is None else float(self.beta1)
        beta2 = hi if self.beta2 is None else float(self.beta2)
        if beta1 <= 0 or beta1 > lo or beta2 < hi:
            raise ValueError(
                f"Limites declarados [{beta1}, {beta2}] não contêm os analíticos [{lo}, {hi}]"
            )
        object.__setattr__(self, 'beta1', beta1)
        object.__setattr__(self, 'beta2', beta2)
        object.__setattr__(self, 'shifts', tuple(float(s) for s in self.shifts))

    @property
    def analytic_bounds(self) -> tuple[float, float]:
        if self.kind is ForcingKind.CONSTANT:
            spread = 0.0
        elif self.kind is ForcingKind.QUASIPERIODIC:
            spread = abs(self.amplitude) + abs(self.amplitude2)
        else:
            spread = abs(self.amplitude)
        return self.beta0 - spread, self.beta0 + spread

    @property
    def is_constant(self) -> bool:
        return self.kind is ForcingKind.CONSTANT


@dataclass(frozen=True)
class HullSample:
    direction: Direction
    offsets: tuple[float, ...]
    translates: tuple[Forcing, ...]
    limit: Forcing | None = None

    @property
    def limit_kind(self) -> ForcingKind | None:
        return self.limit.kind if self.limit is not None else None


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverConfig:
    lam: float
    dt: float = 0.01
    scheme: Scheme = Scheme.ETDRK4
    dealias: bool = True
    dealias_factor: float = 2.0
    snapshot_stride: int = 10
    n_threads: int = 1
    mode_stride: int = 1
    blowup_factor: float = 1e3

    def __post_init__(self):
        object.__setattr__(self, 'scheme', Scheme(self.scheme))
        if not self.lam > 0:
            raise ValueError(f"λ deve ser positivo: {self.lam}")
        if not 0 < self.dt <= 0.1:
            raise ValueError(f"dt fora do envelope de estabilidade (0, 0.1]: {self.dt}")
        if self.snapshot_stride < 1 or self.mode_stride < 1 or self.n_threads < 1:
            raise ValueError("snapshot_stride, mode_stride e n_threads devem ser >= 1")
        if self.dealias_factor < 1.0:
            raise ValueError(f"dealias_factor deve ser >= 1: {self.dealias_factor}")

    def with_(self, **changes) -> 'SolverConfig':
        return replace(self, **changes)

    def describe(self) -> dict:
        return {
            'lambda': self.lam,
            'dt': self.dt,
            'scheme': self.scheme.value,
            'dealias': self.dealias,
            'dealias_factor': self.dealias_factor,
            'snapshot_stride': self.snapshot_stride,
            'n_threads': self.n_threads,
            'mode_stride': self.mode_stride,
            'blowup_factor': self.blowup_factor,
        }


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Amostras de T_β(t,s)u0; origin distingue corridas diretas de soluções globais construídas"""
    t0: float
    times: np.ndarray
    states: tuple[Field, ...]
    forcing: Forcing
    config: SolverConfig
    origin: str = 'forward'

    def __post_init__(self):
        times = _frozen_array(self.times)
        states = tuple(self.states)
        if times.ndim != 1 or len(times) != len(states) or len(states) == 0:
            raise ValueError("times e states devem ter o mesmo tamanho (não vazio)")
        if times[0] != self.t0:
            raise ValueError(f"times[0]={times[0]} difere de t0={self.t0}")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times deve ser estritamente crescente")
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'states', states)

    @property
    def grid(self) -> Grid:
        return self.states[0].grid

    @property
    def final(self) -> Field:
        return self.states[-1]

    @property
    def values(self) -> np.ndarray:
        return np.vstack([s.values for s in self.states])

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True, eq=False)
class OrderedPair:
    upper: Trajectory
    lower: Trajectory
    violations: np.ndarray

    @property
    def max_violation(self) -> float:
        return float(np.max(self.violations)) if len(self.violations) else 0.0


@dataclass(frozen=True, eq=False)
class SandwichReport:
    trajectory: Trajectory
    lower_bound: Trajectory
    upper_bound: Trajectory
    lower_violation: float
    upper_violation: float

    @property
    def max_violation(self) -> float:
        return max(self.lower_violation, self.upper_violation)


# ---------------------------------------------------------------------------
# equilibria
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Equilibrium:
    j: int
    sign: Sign
    lam: float
    beta: float
    profile: Field
    slope_at_0: float
    zeros: tuple[float, ...]
    residual: float

    @property
    def label(self) -> str:
        if self.j == 0:
            return 'phi_0'
        return f"phi_{self.j}_{self.sign.word}"


# ---------------------------------------------------------------------------
# pullback
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NonAutEquilibrium:
    j: int
    sign: Sign
    lam: float
    trajectory: Trajectory
    convergence_history: tuple[tuple[float, float], ...]
    certificates: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.trajectory.times

    @property
    def states(self) -> tuple[Field, ...]:
        return self.trajectory.states

    @property
    def forcing(self) -> Forcing:
        return self.trajectory.forcing

    @property
    def final_delta(self) -> float:
        return self.convergence_history[-1][1] if self.convergence_history else math.inf

    @property
    def label(self) -> str:
        return f"xi_{self.j}_{self.sign.word}"


@dataclass(frozen=True, eq=False)
class LabeledField:
    label: str
    field: Field


@dataclass(frozen=True, eq=False)
class AttractorSection:
    t: float
    lam: float
    members: tuple[LabeledField, ...]
    morse_labels: tuple[tuple[str, str], ...] = ()

    @property
    def labels(self) -> list[str]:
        return [m.label for m in self.members]


@dataclass(frozen=True, eq=False)
class DecayCurve:
    times: np.ndarray
    distances: np.ndarray

    @property
    def final(self) -> float:
        return float(self.distances[-1])


@dataclass(frozen=True)
class MaximalityEntry:
    index: int
    excess: float
    time_of_max: float


# ---------------------------------------------------------------------------
# structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroStructure:
    count: int
    simple: bool
    crossings: tuple[float, ...]
    degenerate: bool = False


@dataclass(frozen=True)
class OscillationClass:
    kind: OscillationKind
    m: int
    defect: float

    @property
    def label(self) -> str:
        if self.kind is OscillationKind.F_M_PLUS:
            return f"F_{self.m}_plus"
        if self.kind is OscillationKind.F_M_MINUS:
            return f"F_{self.m}_minus"
        return self.kind.value


@dataclass(frozen=True, eq=False)
class LapAudit:
    times: np.ndarray
    laps: tuple[int, ...]
    violations: tuple[tuple[float, int, int], ...]
    identically_zero: bool
    degenerate_times: tuple[float, ...] = ()

    @property
    def non_increasing(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            'times': [float(t) for t in self.times],
            'laps': list(self.laps),
            'violations': [list(v) for v in self.violations],
            'identically_zero': self.identically_zero,
            'degenerate_times': list(self.degenerate_times),
        }


@dataclass(frozen=True, eq=False)
class LimitSetEstimate:
    direction: LimitDirection
    times: np.ndarray
    snapshots: tuple[Field, ...]
    classification: OscillationClass
    snapshot_classes: tuple[OscillationClass, ...]
    mixed: bool
    strip: tuple[int, Sign] | None = None
    strip_violation: float | None = None
    matched_hull_equilibria: tuple[tuple[str, float], ...] = ()

    def as_dict(self) -> dict:
        return {
            'direction': self.direction.value,
            'times': [float(t) for t in self.times],
            'classification': self.classification.label,
            'defect': self.classification.defect,
            'snapshot_classes': [c.label for c in self.snapshot_classes],
            'mixed': self.mixed,
            'strip': None if self.strip is None else [self.strip[0], self.strip[1].value],
            'strip_violation': self.strip_violation,
            'matched_hull_equilibria': [list(m) for m in self.matched_hull_equilibria],
        }


# ---------------------------------------------------------------------------
# connections
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Connection:
    j: int
    sign: Sign
    launch_time: float
    epsilon: float
    trajectory: Trajectory
    backward_norms: np.ndarray
    forward_distance: np.ndarray
    certificates: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"zeta_{self.j}_{self.sign.word}"


@dataclass(frozen=True)
class ProbeTrial:
    mode: int
    sign: Sign
    epsilon: float
    escaped: bool
    escape_time: float | None
    returned: bool
    lap_at_escape: int | None
    lap_late: int | None

    @property
    def lap_increase(self) -> bool:
        if self.lap_at_escape is None or self.lap_late is None:
            return False
        return self.lap_late > self.lap_at_escape


@dataclass(frozen=True)
class ProbeReport:
    lam: float
    escape_radius_factor: float
    return_radius_factor: float
    trials: tuple[ProbeTrial, ...]
    findings: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.findings


# ---------------------------------------------------------------------------
# cli
# ---------------------------------------------------------------------------

@dataclass
class RunManifest:
    command: str
    config: dict
    artifacts: list[dict] = field(default_factory=list)
    wall_clock: float = 0.0
    versions: dict = field(default_factory=dict)
    certification: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    errors: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(bool(v) for v in self.certification.values())

    def as_dict(self) -> dict:
        return {
            'command': self.command,
            'config': self.config,
            'artifacts': self.artifacts,
            'wall_clock': self.wall_clock,
            'versions': self.versions,
            'certification': self.certification,
            'passed': self.passed,
            'summary': self.summary,
            'errors': self.errors,
        }
