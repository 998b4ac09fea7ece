"""
Генераторы Магнуса (Ω₂ точная квадратура, Ω̃₂ по Риману, Ω₁), унитарные
операторы шагов, эталонные пропагаторы и произведения на длинном времени.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed

from core.exceptions import ConvergenceError, InvalidInputError
from core.physics.operators import (
    DenseUnitary,
    InteractionPicture,
    TimeHamiltonian,
    _eigh,
    spectral_norm,
)


logger = logging.getLogger(__name__)

__all__ = [
    'StepPlan', 'Provenance', 'SkewGenerator', 'DenseUnitary', 'MRule',
    'riemann_sums', 'omega2_riemann', 'omega1_riemann', 'omega2_exact', 'omega1_exact',
    'step_unitary', 'evolve', 'evolve_magnus2', 'reference_interaction', 'reference_general',
]

GENERATOR_CHOICES = ('magnus2', 'magnus1')
QUADRATURE_CHOICES = ('riemann', 'exact')


# ==========================
# ТИПЫ
# ==========================
@dataclass(frozen=True)
class StepPlan:
    """Разбиение [t_start, t_start + T] на L равных шагов h = T / L, M узлов квадратуры на шаг."""
    t_total: float
    n_steps: int
    n_quad: int = 1
    t_start: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.t_total) or self.t_total <= 0:
            raise InvalidInputError(f"StepPlan.t_total must be positive, got {self.t_total!r}")
        for name in ('n_steps', 'n_quad'):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise InvalidInputError(f"StepPlan.{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @classmethod
    def from_step(cls, t_total: float, step: float, n_quad: int = 1, t_start: float = 0.0) -> 'StepPlan':
        if step <= 0:
            raise InvalidInputError(f"step must be positive, got {step!r}")
        n_steps = round(t_total / step)
        if n_steps < 1 or abs(n_steps * step - t_total) > 1e-12 * max(t_total, 1.0):
            raise InvalidInputError(f"T = {t_total} is not an integer multiple of h = {step}")
        return cls(t_total, n_steps, n_quad, t_start)

    @property
    def step(self) -> float:
        return self.t_total / self.n_steps

    def node(self, j: int) -> float:
        return self.t_start + j * self.step


class Provenance(str, Enum):
    MAGNUS1_RIEMANN = 'magnus1_riemann'
    MAGNUS1_EXACT = 'magnus1_exact'
    MAGNUS2_RIEMANN = 'magnus2_riemann'
    MAGNUS2_EXACT = 'magnus2_exact'


@dataclass(frozen=True, eq=False)
class SkewGenerator:
    matrix: np.ndarray
    provenance: Provenance
    t_start: float
    step: float
    n_quad: Optional[int] = None

    def __post_init__(self) -> None:
        arr = np.array(self.matrix, dtype=np.complex128, copy=True)
        dev = spectral_norm(arr + arr.conj().T)
        limit = settings.MAGNUS_SKEW_RTOL * (1.0 + spectral_norm(arr))
        if dev > limit:
            raise InvalidInputError(f"{self.provenance.value} generator is not anti-Hermitian ({dev:.3e} > {limit:.3e})")
        arr = 0.5 * (arr - arr.conj().T)
        arr.setflags(write=False)
        object.__setattr__(self, 'matrix', arr)
        object.__setattr__(self, 'provenance', Provenance(self.provenance))

    @property
    def window(self) -> Tuple[float, float]:
        return self.t_start, self.step

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class MRule:
    """Выбор числа узлов M в зависимости от шага.

    fixed:        M = value
    proportional: M = value * L
    error_bound:  M = ceil(deriv / (c_h * h^(theta - 1)))
    """
    kind: str = 'fixed'
    value: int = 1
    c_h: float = 1.0
    theta: float = 2.0
    deriv: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ('fixed', 'proportional', 'error_bound'):
            raise InvalidInputError(f"unknown M rule {self.kind!r}")
        if self.value < 1:
            raise InvalidInputError(f"M rule value must be >= 1, got {self.value!r}")

    def __call__(self, step: float, n_steps: int = 1) -> int:
        if self.kind == 'fixed':
            return int(self.value)
        if self.kind == 'proportional':
            return int(self.value) * int(n_steps)
        return max(1, math.ceil(self.deriv / (self.c_h * step ** (self.theta - 1)) - 1e-9))


# ==========================
# КВАДРАТУРЫ
# ==========================
def _check_window(h: float, m: int) -> None:
    if not (h > 0 and math.isfinite(h)):
        raise InvalidInputError(f"step h must be positive, got {h!r}")
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise InvalidInputError(f"number of quadrature points must be a positive integer, got {m!r}")


def riemann_sums(h_t: TimeHamiltonian, t_j: float, h: float, m: int,
                 commutators: bool = True) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Один проход по M левым узлам.

    Возвращает (S, C): S = Σ_p H_p, C = Σ_p [Σ_{q<p} H_q, H_p].
    Каждая выборка H(t_j + p h / M) вычисляется ровно один раз.
    """
    _check_window(h, m)
    dt = h / m
    prefix = np.zeros((h_t.dim, h_t.dim), dtype=np.complex128)
    ordered = np.zeros_like(prefix) if commutators else None
    for p in range(m):
        sample = h_t.sample_array(t_j + p * dt)
        if commutators:
            ordered += prefix @ sample
        prefix += sample
    if not commutators:
        return prefix, None
    # Σ_p [S_p, H_p] = Y - Y^H, где Y = Σ_p S_p H_p (S_p, H_p эрмитовы)
    return prefix, ordered - ordered.conj().T


def omega2_riemann(h_t: TimeHamiltonian, t_j: float, h: float, m: int) -> SkewGenerator:
    first, comm = riemann_sums(h_t, t_j, h, m)
    dt = h / m
    return SkewGenerator(-1j * dt * first + 0.5 * dt * dt * comm,
                         Provenance.MAGNUS2_RIEMANN, t_j, h, int(m))


def omega1_riemann(h_t: TimeHamiltonian, t_j: float, h: float, m: int) -> SkewGenerator:
    first, _ = riemann_sums(h_t, t_j, h, m, commutators=False)
    return SkewGenerator(-1j * (h / m) * first, Provenance.MAGNUS1_RIEMANN, t_j, h, int(m))


def _romberg(h_t: TimeHamiltonian, t_j: float, h: float, tol: Optional[float],
             with_commutator: bool, min_level: int = 3) -> np.ndarray:
    """Ромберг по уровням M_k = 2^(k+1) для левых сумм Римана.

    Ошибка левой суммы раскладывается по всем целым степеням 1/M, поэтому
    столбец i исключает член (1/M)^i.
    """
    _check_window(h, 1)
    if tol is None:
        tol = 1e-12 * max(h_t.alpha, 1e-300) * h
    if tol <= 0:
        raise InvalidInputError(f"tolerance must be positive, got {tol!r}")
    max_level = settings.MAGNUS_QUADRATURE_MAX_LEVEL
    previous_row: List[np.ndarray] = []
    best_prev = None
    gap = math.inf
    for level in range(max_level + 1):
        m = 2 ** (level + 1)
        first, comm = riemann_sums(h_t, t_j, h, m, commutators=with_commutator)
        dt = h / m
        estimate = -1j * dt * first
        if with_commutator:
            estimate = estimate + 0.5 * dt * dt * comm
        row = [estimate]
        for i in range(1, level + 1):
            row.append(row[i - 1] + (row[i - 1] - previous_row[i - 1]) / (2 ** i - 1))
        best = row[-1]
        if best_prev is not None:
            gap = spectral_norm(best - best_prev)
            logger.debug("romberg t_j=%.6g h=%.3g level=%d M=%d gap=%.3e", t_j, h, level, m, gap)
            if gap <= tol and level >= min_level:
                return best
        previous_row = row
        best_prev = best
    raise ConvergenceError(f"quadrature at t_j={t_j:.6g}, h={h:.3g} did not reach tol={tol:.1e}",
                           gap=gap, levels=max_level + 1)


def omega2_exact(h_t: TimeHamiltonian, t_j: float, h: float, tol: Optional[float] = None) -> SkewGenerator:
    return SkewGenerator(_romberg(h_t, t_j, h, tol, with_commutator=True),
                         Provenance.MAGNUS2_EXACT, t_j, h)


def omega1_exact(h_t: TimeHamiltonian, t_j: float, h: float, tol: Optional[float] = None) -> SkewGenerator:
    return SkewGenerator(_romberg(h_t, t_j, h, tol, with_commutator=False),
                         Provenance.MAGNUS1_EXACT, t_j, h)


# ==========================
# ПРОПАГАТОРЫ
# ==========================
def step_unitary(gen: SkewGenerator) -> DenseUnitary:
    """exp(Ω) через разложение эрмитовой i·Ω."""
    vals, vecs = _eigh(1j * gen.matrix, what='i*Omega')
    return DenseUnitary((vecs * np.exp(-1j * vals)) @ vecs.conj().T)


def make_generator(h_t: TimeHamiltonian, t_j: float, h: float, generator: str = 'magnus2',
                   quadrature: str = 'riemann', m: int = 1, tol: Optional[float] = None) -> SkewGenerator:
    if generator not in GENERATOR_CHOICES:
        raise InvalidInputError(f"unknown generator {generator!r}")
    if quadrature not in QUADRATURE_CHOICES:
        raise InvalidInputError(f"unknown quadrature {quadrature!r}")
    if quadrature == 'exact':
        return (omega2_exact if generator == 'magnus2' else omega1_exact)(h_t, t_j, h, tol)
    return (omega2_riemann if generator == 'magnus2' else omega1_riemann)(h_t, t_j, h, m)


def evolve(h_t: TimeHamiltonian, plan: StepPlan, generator: str = 'magnus2', quadrature: str = 'riemann',
           tol: Optional[float] = None, n_jobs: Optional[int] = None) -> DenseUnitary:
    """Π_{j=L-1..0} exp(Ω(t_{j+1}, t_j)); шаг j=0 действует первым.

    Генераторы шагов независимы и считаются параллельно, произведение
    собирается строго по порядку индексов.
    """
    n_jobs = settings.MAGNUS_N_JOBS if n_jobs is None else n_jobs
    h = plan.step

    def one_step(j: int) -> np.ndarray:
        gen = make_generator(h_t, plan.node(j), h, generator, quadrature, plan.n_quad, tol)
        return step_unitary(gen).matrix

    steps = Parallel(n_jobs=n_jobs, prefer='threads')(delayed(one_step)(j) for j in range(plan.n_steps))
    total = np.eye(h_t.dim, dtype=np.complex128)
    for u in steps:
        total = u @ total
    logger.debug("evolve %s/%s: L=%d M=%d h=%.4g", generator, quadrature, plan.n_steps, plan.n_quad, h)
    return DenseUnitary(total)


def evolve_magnus2(h_t: TimeHamiltonian, plan: StepPlan) -> DenseUnitary:
    return evolve(h_t, plan, generator='magnus2', quadrature='riemann')


def reference_interaction(ip: InteractionPicture, t: float, s: float, frame: str = 'grid') -> DenseUnitary:
    """U(t, s) = e^{iAt} e^{-i(A+B)(t-s)} e^{-iAs} для не зависящего от времени B."""
    if not ip.time_independent:
        raise InvalidInputError("reference_interaction requires a time-independent B")
    mu, w = ip.full_eigh
    inner = (w * np.exp(-1j * mu * (t - s))) @ w.conj().T
    u_eig = (ip.phases(t)[:, None] * inner) * ip.phases(-s)[None, :]
    if frame == 'eigen':
        return DenseUnitary(u_eig)
    if frame != 'grid':
        raise InvalidInputError(f"unknown frame {frame!r}")
    return DenseUnitary(ip.to_grid(u_eig))


def _midpoint_product(h_t: TimeHamiltonian, s: float, t: float, n: int) -> np.ndarray:
    delta = (t - s) / n
    total = np.eye(h_t.dim, dtype=np.complex128)
    for k in range(n):
        vals, vecs = _eigh(h_t.sample_array(s + (k + 0.5) * delta), what='H(mid)')
        total = ((vecs * np.exp(-1j * vals * delta)) @ vecs.conj().T) @ total
    return total


def reference_general(h_t: TimeHamiltonian, t: float, s: float, tol: Optional[float] = None,
                      min_level: int = 2) -> DenseUnitary:
    """Упорядоченный по времени пропагатор: экспоненциальная средняя точка
    с удвоением числа подшагов и экстраполяцией Ричардсона по δ².
    """
    if t == s:
        return DenseUnitary(np.eye(h_t.dim, dtype=np.complex128))
    if tol is None:
        tol = 1e-12 * max(h_t.alpha, 1e-300) * abs(t - s)
    if tol <= 0:
        raise InvalidInputError(f"tolerance must be positive, got {tol!r}")
    max_level = settings.MAGNUS_REFERENCE_MAX_LEVEL
    previous_row: List[np.ndarray] = []
    best_prev = None
    gap = math.inf
    for level in range(max_level + 1):
        n = 2 ** level
        row = [_midpoint_product(h_t, s, t, n)]
        for i in range(1, level + 1):
            row.append(row[i - 1] + (row[i - 1] - previous_row[i - 1]) / (4 ** i - 1))
        best = row[-1]
        if best_prev is not None:
            gap = spectral_norm(best - best_prev)
            logger.debug("reference_general [%g, %g] substeps=%d gap=%.3e", s, t, n, gap)
            if gap <= tol and level >= min_level:
                return DenseUnitary(best)
        previous_row = row
        best_prev = best
    raise ConvergenceError(f"reference propagator on [{s:.6g}, {t:.6g}] did not reach tol={tol:.1e}",
                           gap=gap, levels=max_level + 1)
