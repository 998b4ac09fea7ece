"""
Измерения законов ошибки: порядок сходимости, квадратурная ошибка,
суперсходимость в картине взаимодействия и коммутаторные эксперименты.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed

from core.exceptions import BoundViolation, InvalidInputError
from core.physics.integrators import (
    MRule,
    StepPlan,
    evolve,
    make_generator,
    omega2_exact,
    omega2_riemann,
    reference_general,
    reference_interaction,
    step_unitary,
)
from core.physics.operators import (
    GridSpec,
    InteractionPicture,
    TimeHamiltonian,
    commutator,
    hermitian_norm,
    interaction_hamiltonian,
    interaction_picture,
    spectral_norm,
)
from core.utils.fitting import ConvergenceReport, fit_convergence


logger = logging.getLogger(__name__)


class ErrorMode(str, Enum):
    TRUNCATION_ONLY = 'truncation_only'
    FULL_RIEMANN = 'full_riemann'


def _quadrature_for(mode: Union[str, ErrorMode]) -> str:
    return 'exact' if ErrorMode(mode) is ErrorMode.TRUNCATION_ONLY else 'riemann'


def _parallel(n_jobs: Optional[int]) -> Parallel:
    return Parallel(n_jobs=settings.MAGNUS_N_JOBS if n_jobs is None else n_jobs, prefer='threads')


def roundoff_floor(dim: int) -> float:
    return 1e-12 * dim


# ==========================
# СИСТЕМЫ ДЛЯ ИССЛЕДОВАНИЙ
# ==========================
@dataclass(frozen=True, eq=False)
class StudySystem:
    """H(t) вместе с эталонным пропагатором U(t, s).

    centered=True ставит окно одного шага как [t0 - h/2, t0 + h/2].
    """
    name: str
    hamiltonian: TimeHamiltonian
    reference: Callable[[float, float], np.ndarray]
    t0: float = 0.0
    centered: bool = False
    n_points: Optional[int] = None

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def window_start(self, h: float) -> float:
        return self.t0 - 0.5 * h if self.centered else self.t0


def interaction_system(n_points: int, potential: Union[str, Callable] = 'cos',
                       domain_length: float = 2 * math.pi, frame: str = 'eigen') -> StudySystem:
    ip = interaction_picture(GridSpec(n_points, domain_length), potential)
    return StudySystem(
        name=f'interaction[N={n_points}]',
        hamiltonian=interaction_hamiltonian(ip, frame=frame),
        reference=lambda t, s: reference_interaction(ip, t, s, frame=frame).matrix,
        n_points=n_points,
    )


def general_system(h_t: TimeHamiltonian, t0: float = 0.0, centered: bool = False,
                   tol: Optional[float] = None) -> StudySystem:
    return StudySystem(
        name=h_t.name or 'general',
        hamiltonian=h_t,
        reference=lambda t, s: reference_general(h_t, t, s, tol).matrix,
        t0=t0,
        centered=centered,
    )


# ==========================
# ЛОКАЛЬНАЯ / ГЛОБАЛЬНАЯ ОШИБКА
# ==========================
def _check_sweep(values: Sequence[float], name: str, minimum: int = 4) -> List[float]:
    values = [float(v) for v in values]
    if len(values) < minimum:
        raise InvalidInputError(f"{name} needs at least {minimum} points, got {len(values)}")
    if any(v <= 0 for v in values):
        raise InvalidInputError(f"{name} must contain positive values")
    return values


def local_error(system: StudySystem, h: float, mode: Union[str, ErrorMode] = ErrorMode.TRUNCATION_ONLY,
                m_rule: Optional[MRule] = None, generator: str = 'magnus2', tol: Optional[float] = None) -> float:
    t_a = system.window_start(h)
    m = m_rule(h, 1) if m_rule is not None else 1
    gen = make_generator(system.hamiltonian, t_a, h, generator, _quadrature_for(mode), m, tol)
    err = spectral_norm(system.reference(t_a + h, t_a) - step_unitary(gen).matrix)
    logger.debug("%s local h=%.5g M=%d error=%.3e", system.name, h, m, err)
    return err


def local_error_study(system: StudySystem, h_list: Sequence[float],
                      mode: Union[str, ErrorMode] = ErrorMode.TRUNCATION_ONLY,
                      m_rule: Optional[MRule] = None, generator: str = 'magnus2',
                      tol: Optional[float] = None, n_jobs: Optional[int] = None) -> ConvergenceReport:
    """Ошибка одного шага ||U_exact(t0+h, t0) - U_2(t0+h, t0)|| и наклон по h."""
    h_list = _check_sweep(h_list, 'h_list')
    if max(h_list) / min(h_list) < 10:
        logger.warning("%s: h_list spans less than a decade, slope may be unreliable", system.name)
    errors = _parallel(n_jobs)(
        delayed(local_error)(system, h, mode, m_rule, generator, tol) for h in h_list
    )
    report = fit_convergence(h_list, errors, label=f'{system.name}:local:{generator}:{ErrorMode(mode).value}',
                             floor=roundoff_floor(system.dim))
    _log_report(report)
    return report


def global_error(system: StudySystem, t_total: float, n_steps: int,
                 mode: Union[str, ErrorMode] = ErrorMode.TRUNCATION_ONLY, m_rule: Optional[MRule] = None,
                 generator: str = 'magnus2', tol: Optional[float] = None) -> float:
    h = t_total / n_steps
    m = m_rule(h, n_steps) if m_rule is not None else 1
    plan = StepPlan(t_total, n_steps, m, t_start=system.t0)
    u = evolve(system.hamiltonian, plan, generator, _quadrature_for(mode), tol, n_jobs=1)
    err = spectral_norm(system.reference(system.t0 + t_total, system.t0) - u.matrix)
    logger.debug("%s global L=%d M=%d error=%.3e", system.name, n_steps, m, err)
    return err


def global_error_study(system: StudySystem, t_total: float, l_list: Sequence[int],
                       mode: Union[str, ErrorMode] = ErrorMode.TRUNCATION_ONLY,
                       m_rule: Optional[MRule] = None, generator: str = 'magnus2',
                       tol: Optional[float] = None, n_jobs: Optional[int] = None) -> ConvergenceReport:
    """||U_exact(T, 0) - Ũ(T, 0)|| по h = T / L."""
    if not (t_total > 0):
        raise InvalidInputError(f"T must be positive, got {t_total!r}")
    l_list = [int(n) for n in _check_sweep(l_list, 'l_list')]
    errors = _parallel(n_jobs)(
        delayed(global_error)(system, t_total, n, mode, m_rule, generator, tol) for n in l_list
    )
    steps = [t_total / n for n in l_list]
    report = fit_convergence(steps, errors, label=f'{system.name}:global:{generator}:{ErrorMode(mode).value}',
                             floor=roundoff_floor(system.dim))
    _log_report(report)
    return report


def _log_report(report: ConvergenceReport) -> None:
    if report.skipped:
        logger.info("%s: errors at roundoff floor, slope fit skipped", report.label)
        return
    logger.info("%s: slope=%.3f constant=%.3e residual=%.3f", report.label,
                report.fitted_slope, report.constant, report.residual)
    if not report.conclusive or 'non_monotone' in report.flags:
        logger.warning("%s: inconclusive fit (residual=%.3f, flags=%s)", report.label,
                       report.residual, ','.join(report.flags))


@dataclass(frozen=True)
class GridConstantReport:
    n_list: Tuple[int, ...]
    reports: Tuple[ConvergenceReport, ...]
    order: float

    @property
    def constants(self) -> List[float]:
        return [0.0 if r.skipped else r.constant_for_order(self.order) for r in self.reports]

    @property
    def fitted_log_constants(self) -> List[float]:
        return [r.fitted_log_constant for r in self.reports]

    @property
    def spread(self) -> float:
        values = self.constants
        if min(values) <= 0:
            return math.nan
        return max(values) / min(values)


def preconstant_vs_grid(h_list: Sequence[float], n_list: Sequence[int], potential: Union[str, Callable] = 'cos',
                        order: float = 5.0, mode: Union[str, ErrorMode] = ErrorMode.TRUNCATION_ONLY,
                        generator: str = 'magnus2', domain_length: float = 2 * math.pi,
                        n_jobs: Optional[int] = None,
                        known: Optional[Dict[int, ConvergenceReport]] = None) -> GridConstantReport:
    """Локальное исследование для каждого N и разброс предконстант между N.

    known: уже посчитанные отчёты тех же h_list и mode по N, повторно не считаются.
    """
    known = known or {}
    reports = tuple(
        known[n] if n in known else local_error_study(
            interaction_system(n, potential, domain_length), h_list, mode, generator=generator, n_jobs=n_jobs)
        for n in n_list
    )
    result = GridConstantReport(tuple(int(n) for n in n_list), reports, order)
    logger.info("preconstant vs N=%s: constants=%s spread=%.3f", list(result.n_list),
                ['%.3e' % c for c in result.constants], result.spread)
    return result


# ==========================
# КВАДРАТУРНАЯ ОШИБКА
# ==========================
def quadrature_bound(h_t: TimeHamiltonian, h: float, m: int) -> float:
    """(h²/M) max||H'|| + (3h³/M) max||H|| ||H'|| по объявленным оценкам."""
    if h_t.deriv_bound_1 is None:
        raise InvalidInputError(f"{h_t.name or 'H(t)'} declares no derivative bound")
    d1 = h_t.deriv_bound_1
    return (h * h / m) * d1 + (3 * h ** 3 / m) * h_t.alpha * d1


def interaction_quadrature_bound(ip: InteractionPicture, h: float, m: int) -> float:
    comm = ip.commutator_ab_norm
    return (h * h / m) * comm + (3 * h ** 3 / m) * float(ip.alpha_b) * comm


def quadrature_error_study(h_t: TimeHamiltonian, h: float, m_list: Sequence[int], t_j: float = 0.0,
                           tol: Optional[float] = None, check_bound: bool = True) -> ConvergenceReport:
    """||step(Ω₂) - step(Ω̃₂(M))|| по M; каждая точка сверяется с оценкой квадратурной ошибки."""
    m_list = [int(m) for m in _check_sweep(m_list, 'm_list')]
    exact = step_unitary(omega2_exact(h_t, t_j, h, tol)).matrix
    errors = []
    for m in m_list:
        err = spectral_norm(exact - step_unitary(omega2_riemann(h_t, t_j, h, m)).matrix)
        errors.append(err)
        if check_bound:
            bound = quadrature_bound(h_t, h, m)
            logger.debug("quadrature M=%d error=%.3e bound=%.3e", m, err, bound)
            if err > bound * (1 + 1e-9) + 1e-13:
                raise BoundViolation(f"quadrature error {err:.3e} exceeds bound {bound:.3e} at M={m}",
                                     abscissa=m, value=err, bound=bound)
    report = fit_convergence(m_list, errors, label=f'{h_t.name}:quadrature:h={h:g}',
                             floor=roundoff_floor(h_t.dim))
    _log_report(report)
    return report


# ==========================
# КОММУТАТОРНЫЕ ЭКСПЕРИМЕНТЫ
# ==========================
@dataclass(frozen=True, eq=False)
class TaylorSplit:
    """A(t) = -i e^{iAt} B e^{-iAt} = alpha + beta t + gamma(t)."""
    ip: InteractionPicture
    alpha_term: np.ndarray
    beta_term: np.ndarray

    def a_of_t(self, t: float) -> np.ndarray:
        return -1j * self.ip.to_grid(self.ip.conjugate_eigen(self.ip.b_eigen, t))

    def gamma_at(self, t: float) -> np.ndarray:
        return self.a_of_t(t) - self.alpha_term - self.beta_term * t

    def lipschitz_bound(self) -> float:
        """Константа Липшица t -> ||[alpha, [beta, gamma(t)]]||: 8 ||alpha|| ||beta||^2.

        ||a'(t)|| = ||[A, B]|| = ||beta||, откуда ||gamma'(t)|| <= 2 ||beta||.
        """
        return 8.0 * spectral_norm(self.alpha_term) * spectral_norm(self.beta_term) ** 2


def taylor_split(ip: InteractionPicture) -> TaylorSplit:
    if not ip.time_independent:
        raise InvalidInputError("taylor split needs a time-independent B")
    b = ip.b.entries
    return TaylorSplit(ip, -1j * b, commutator(ip.a_matrix.entries, b))


def taylor_term_norm(ts: TaylorSplit, t_grid: Sequence[float]) -> List[float]:
    """||[alpha, [beta, gamma(t)]]|| на сетке t."""
    values = []
    for t in t_grid:
        nested = commutator(ts.alpha_term, commutator(ts.beta_term, ts.gamma_at(t)))
        # вложенный коммутатор антиэрмитов
        values.append(hermitian_norm(1j * nested))
    return values


def _rotated_potential(n_points: int, v: Union[str, Callable], domain_length: float) -> Tuple[InteractionPicture, np.ndarray]:
    ip = interaction_picture(GridSpec(n_points, domain_length), v)
    return ip, ip.b_eigen


def key_commutator_norm(v: Union[str, Callable], n_points: int, h_grid: Sequence[float], n_grid: int = 9,
                        domain_length: float = 2 * math.pi) -> List[float]:
    """sup_{tau, s} ||[V_tau, [V_s, V]]||, V_s = e^{iAs} V e^{-iAs}, на равномерной сетке n_grid x n_grid.

    A и V вещественны, поэтому значение в (-tau, -s) совпадает со значением
    в (tau, s), и перебираются только s > 0.
    """
    ip, v_eig = _rotated_potential(n_points, v, domain_length)
    values = []
    for h in h_grid:
        grid = np.linspace(-h, h, n_grid)
        rotated = [ip.conjugate_eigen(v_eig, s) for s in grid]
        best = 0.0
        for j, s in enumerate(grid):
            if s <= 0:
                continue
            inner = commutator(rotated[j], v_eig)
            for k in range(n_grid):
                # [V_tau, [V_s, V]] эрмитов
                best = max(best, hermitian_norm(commutator(rotated[k], inner)))
        values.append(best)
        logger.debug("key commutator N=%d h=%.4g value=%.4e", n_points, h, best)
    return values


def first_commutator_norm(v: Union[str, Callable], n_points: int, h_grid: Sequence[float], n_grid: int = 9,
                          domain_length: float = 2 * math.pi) -> List[float]:
    """sup_s ||[V, V_s]|| при s in [-h, h]."""
    ip, v_eig = _rotated_potential(n_points, v, domain_length)
    values = []
    for h in h_grid:
        best = 0.0
        for s in np.linspace(-h, h, n_grid):
            best = max(best, hermitian_norm(1j * commutator(v_eig, ip.conjugate_eigen(v_eig, s))))
        values.append(best)
    return values


def commutator_bound_c_comm(h_t: TimeHamiltonian, window: Tuple[float, float], n_samples: int) -> float:
    """max ||[H(tau), [H(s), H(t)]]|| по тройкам узлов равномерной сетки окна."""
    if n_samples < 3:
        raise InvalidInputError(f"n_samples must be >= 3, got {n_samples}")
    times = np.linspace(window[0], window[1], n_samples)
    samples = [h_t.sample_array(t) for t in times]
    best = 0.0
    for i in range(n_samples):
        for j in range(i + 1, n_samples):
            inner = commutator(samples[i], samples[j])
            for sample in samples:
                best = max(best, hermitian_norm(commutator(sample, inner)))
    return best


@dataclass(frozen=True)
class TruncationConstantReport:
    report: ConvergenceReport
    c_comm: Tuple[float, ...]
    ratios: Tuple[float, ...]

    @property
    def constant(self) -> float:
        return max(self.ratios)

    @property
    def variation(self) -> float:
        return max(self.ratios) / min(self.ratios)

    def bound_holds(self) -> bool:
        return all(e <= self.constant * c * h ** 3 * (1 + 1e-12)
                   for h, e, c in zip(self.report.abscissae, self.report.errors, self.c_comm))


def truncation_constant_study(system: StudySystem, h_list: Sequence[float], n_samples: int = 5,
                              tol: Optional[float] = None, n_jobs: Optional[int] = None) -> TruncationConstantReport:
    """C в оценке error <= C * C_comm * h³, C_comm берётся по окну каждого шага."""
    report = local_error_study(system, h_list, ErrorMode.TRUNCATION_ONLY, tol=tol, n_jobs=n_jobs)
    c_comm, ratios = [], []
    for h, err in zip(report.abscissae, report.errors):
        t_a = system.window_start(h)
        c = commutator_bound_c_comm(system.hamiltonian, (t_a, t_a + h), n_samples)
        if c <= 0:
            raise InvalidInputError(f"{system.name}: C_comm vanishes on [{t_a:g}, {t_a + h:g}]")
        c_comm.append(c)
        ratios.append(err / (c * h ** 3))
    result = TruncationConstantReport(report, tuple(c_comm), tuple(ratios))
    logger.info("%s: truncation constant C=%.3e variation=%.3f", system.name, result.constant, result.variation)
    return result


def long_time_bound(t_total: float, h: float, c_local: float, order: float, quad_per_step: float = 0.0) -> float:
    """(T/h) * (C h^{order} + квадратурная ошибка шага): правая часть оценки на длинном времени."""
    return (t_total / h) * (c_local * h ** order + quad_per_step)
