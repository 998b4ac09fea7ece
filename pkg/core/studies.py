"""
Именованные исследования: каждое считает строки CSV, проверки приёмки
и (по возможности) спецификацию графика.

Код выхода: 0 все проверки прошли, 1 провалена проверка, 3 аппроксимация
неубедительна (остаток выше допуска), при этом ни одна убедительная проверка не провалена.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy import linalg as sla

from core.circuit.lcu import (
    assemble_lcu_target,
    fig1_block_encoding,
    fig1_gate_list,
    fig1_report,
)
from core.circuit.gates import gate_list_to_json
from core.circuit.oracles import (
    comp_oracle,
    exponentiate_block_encoding,
    ham_t_oracle,
    interaction_ham_t,
    verify_block_encoding,
)
from core.exceptions import BoundViolation
from core.forms import StudyConfig, load_study_config
from core.physics.analysis import (
    ErrorMode,
    GridConstantReport,
    general_system,
    global_error_study,
    interaction_system,
    key_commutator_norm,
    first_commutator_norm,
    interaction_quadrature_bound,
    preconstant_vs_grid,
    quadrature_bound,
    quadrature_error_study,
    local_error_study,
    taylor_split,
    taylor_term_norm,
    truncation_constant_study,
)
from core.physics.integrators import MRule, omega2_exact, omega2_riemann, step_unitary
from core.physics.operators import (
    GridSpec,
    TWO_LEVEL_FAMILIES,
    interaction_hamiltonian,
    interaction_picture,
    linear_commuting,
    random_smooth_family,
    spectral_norm,
    switching,
)
from core.resources import REGIME_CHOICES, CostQuery, plan_resources, table1_row
from core.utils.export import write_json, write_study_csv
from core.utils.fitting import ConvergenceReport, fit_convergence
from core.utils.plotting import PanelSpec, PlotSpec, emit_plot


logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3


# ==========================
# РЕЗУЛЬТАТЫ
# ==========================
@dataclass
class Check:
    name: str
    passed: bool
    conclusive: bool = True
    detail: str = ''


@dataclass
class StudyResult:
    study: str
    rows: List[Dict[str, Any]] = field(default_factory=list)
    checks: List[Check] = field(default_factory=list)
    plot: Optional[PlotSpec] = None
    artifacts: Dict[str, Any] = field(default_factory=dict)
    paths: Dict[str, Path] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        if any(c.conclusive and not c.passed for c in self.checks):
            return EXIT_FAILED
        if any(not c.conclusive for c in self.checks):
            return EXIT_INCONCLUSIVE
        return EXIT_PASS

    def check(self, name: str, passed: bool, detail: str = '') -> None:
        self.checks.append(Check(name, bool(passed), True, detail))

    def check_slope(self, name: str, report: ConvergenceReport, low: float, high: float,
                    residual_tol: float) -> None:
        detail = f'slope={report.fitted_slope:.3f} in [{low}, {high}], residual={report.residual:.3f}'
        conclusive = not report.skipped and report.residual <= residual_tol
        self.checks.append(Check(name, report.slope_within(low, high), conclusive, detail))

    def add_report_rows(self, study_id: str, report: ConvergenceReport, abscissa: str = 'h',
                        order: Optional[float] = None, **extra: Any) -> None:
        constant = report.constant_for_order(order) if order is not None and not report.skipped else report.constant
        for x, err in zip(report.abscissae, report.errors):
            row = {'study_id': study_id, abscissa: x, 'error': err, 'slope': report.fitted_slope,
                   'constant': constant, 'deviation': report.residual, 'notes': ','.join(report.flags)}
            row.update(extra)
            self.rows.append(row)


def _residual_tol(cfg: StudyConfig) -> float:
    return cfg.fit_residual


# ==========================
# СУПЕРСХОДИМОСТЬ И БАЗОВЫЙ ПЕРВЫЙ ПОРЯДОК
# ==========================
def _interaction_orders(cfg: StudyConfig, generator: str, local_range, global_range, order: float) -> StudyResult:
    result = StudyResult(cfg.study)
    tol = _residual_tol(cfg)
    system = interaction_system(cfg.n_points, cfg.potential, cfg.domain_length)
    n = cfg.n_points

    local = local_error_study(system, cfg.h_list, ErrorMode.TRUNCATION_ONLY, generator=generator, n_jobs=cfg.n_jobs)
    result.add_report_rows(f'{cfg.study}_local', local, N=n)
    result.check_slope(f'local slope (N={n})', local, *local_range, residual_tol=tol)

    glob = global_error_study(system, cfg.t_total, cfg.l_list, ErrorMode.TRUNCATION_ONLY,
                              generator=generator, n_jobs=cfg.n_jobs)
    result.add_report_rows(f'{cfg.study}_global', glob, N=n, T=cfg.t_total)
    for row, n_steps in zip(result.rows[-len(cfg.l_list):], cfg.l_list):
        row['L'] = n_steps
    result.check_slope(f'global slope (N={n})', glob, *global_range, residual_tol=tol)

    if not local.skipped:
        ratios = local.ratios_for_order(order)
        result.check(f'local constant stable within 2x (N={n})', max(ratios) <= 2 * min(ratios),
                     f'error/h^{order:g} ranges over [{min(ratios):.3e}, {max(ratios):.3e}]')

    if cfg.n_list:
        grid: GridConstantReport = preconstant_vs_grid(cfg.h_list, cfg.n_list, cfg.potential, order,
                                                       generator=generator, domain_length=cfg.domain_length,
                                                       n_jobs=cfg.n_jobs, known={n: local})
        for n_k, report, constant in zip(grid.n_list, grid.reports, grid.constants):
            result.rows.append({'study_id': f'{cfg.study}_preconstant', 'N': n_k, 'slope': report.fitted_slope,
                                'constant': constant, 'deviation': report.residual,
                                'notes': f'order={order:g}'})
            if n_k != n:
                result.check_slope(f'local slope (N={n_k})', report, *local_range, residual_tol=tol)
        result.check('preconstant independent of N within 2x', grid.spread <= 2.0, f'spread={grid.spread:.3f}')

    result.plot = PlotSpec((
        PanelSpec(f'{cfg.study}_local', 'h', 'error', title='single step'),
        PanelSpec(f'{cfg.study}_global', 'h', 'error', title=f'T = {cfg.t_total:g}'),
    ))
    return result


def study_superconvergence(cfg: StudyConfig) -> StudyResult:
    return _interaction_orders(cfg, 'magnus2', (4.7, 5.3), (3.7, 4.3), order=5.0)


def study_qhop_baseline(cfg: StudyConfig) -> StudyResult:
    return _interaction_orders(cfg, 'magnus1', (2.7, 3.3), (1.7, 2.3), order=3.0)


# ==========================
# ОБЩИЙ H(t)
# ==========================
def study_general_order(cfg: StudyConfig) -> StudyResult:
    result = StudyResult(cfg.study)
    tol = _residual_tol(cfg)
    ref_tol = cfg.reference_tol or 1e-13
    family = TWO_LEVEL_FAMILIES[cfg.family]()

    smooth = truncation_constant_study(general_system(family, t0=0.5, tol=ref_tol), cfg.h_list, n_jobs=cfg.n_jobs)
    result.add_report_rows('general_local', smooth.report)
    for row, c_comm, ratio in zip(result.rows[-len(smooth.ratios):], smooth.c_comm, smooth.ratios):
        row['notes'] = f'c_comm={c_comm:.6e};ratio={ratio:.6e}'
    result.check('general local slope >= 2.7', smooth.report.fitted_slope >= 2.7,
                 f'slope={smooth.report.fitted_slope:.3f}')
    result.check('general local errors within C*C_comm*h^3', smooth.bound_holds(), f'C={smooth.constant:.3e}')
    result.check_slope('derivative-regime local slope', smooth.report, 4.7, 5.3, residual_tol=tol)

    jump = truncation_constant_study(general_system(switching(), t0=0.0, centered=True, tol=ref_tol),
                                     cfg.h_list, n_jobs=cfg.n_jobs)
    result.add_report_rows('switching_local', jump.report)
    for row, ratio in zip(result.rows[-len(jump.ratios):], jump.ratios):
        row['notes'] = f'ratio={ratio:.6e}'
    result.check_slope('commutator-regime local slope', jump.report, 2.7, 3.3, residual_tol=tol)
    result.check('commutator-regime constant stable within 2x', jump.variation <= 2.0,
                 f'C={jump.constant:.3e}, variation={jump.variation:.3f}')

    glob = global_error_study(general_system(family, t0=0.0, tol=ref_tol), cfg.t_total, cfg.l_list,
                              ErrorMode.FULL_RIEMANN, m_rule=MRule('proportional', 1), n_jobs=cfg.n_jobs)
    result.add_report_rows('general_global', glob, T=cfg.t_total)
    for row, n_steps in zip(result.rows[-len(cfg.l_list):], cfg.l_list):
        row['L'] = n_steps
        row['M'] = n_steps
    result.check_slope('general global slope with M = L', glob, 1.7, 2.3, residual_tol=tol)

    result.plot = PlotSpec((
        PanelSpec('general_local', 'h', 'error', title=family.name),
        PanelSpec('switching_local', 'h', 'error', title='switching'),
        PanelSpec('general_global', 'h', 'error', title='global, M = L'),
    ))
    return result


# ==========================
# КВАДРАТУРА
# ==========================
def study_quadrature(cfg: StudyConfig) -> StudyResult:
    result = StudyResult(cfg.study)
    h = cfg.h_list[0]
    family = TWO_LEVEL_FAMILIES[cfg.family]()
    try:
        report = quadrature_error_study(family, h, cfg.m_list, t_j=0.5, tol=cfg.reference_tol)
    except BoundViolation as exc:
        result.check('quadrature error within bound', False, str(exc))
        return result
    result.add_report_rows('quadrature', report, abscissa='M', h=h)
    for row in result.rows:
        row['notes'] = f'bound={quadrature_bound(family, h, row["M"]):.6e}'
    result.check('quadrature error within bound', True)
    result.check_slope('quadrature slope', report, -1.2, -0.8, residual_tol=_residual_tol(cfg))

    ip = interaction_picture(GridSpec(cfg.n_points, cfg.domain_length), cfg.potential)
    h_i = interaction_hamiltonian(ip, frame='eigen')
    try:
        ip_report = quadrature_error_study(h_i, h, cfg.m_list, t_j=0.0, tol=cfg.reference_tol)
        result.add_report_rows('quadrature_interaction', ip_report, abscissa='M', h=h, N=cfg.n_points)
        ip_bounds = [interaction_quadrature_bound(ip, h, int(m)) for m in ip_report.abscissae]
        for row, bound in zip(result.rows[-len(ip_bounds):], ip_bounds):
            row['notes'] = f'bound={bound:.6e}'
        result.check('interaction quadrature error within bound',
                     all(err <= bound for err, bound in zip(ip_report.errors, ip_bounds)),
                     f'||[A,B]|| = {ip.commutator_ab_norm:.6e}')
    except BoundViolation as exc:
        result.check('interaction quadrature error within bound', False, str(exc))

    # коммутирующее семейство diag(a) + t diag(b): ошибка ровно 2 sin(max|b| h² / 4M)
    commuting = linear_commuting([1.0, -0.5], [2.0, 1.0])
    exact = step_unitary(omega2_exact(commuting, 0.0, h)).matrix
    deviations = []
    for m in cfg.m_list:
        err = spectral_norm(exact - step_unitary(omega2_riemann(commuting, 0.0, h, m)).matrix)
        predicted = 2 * math.sin(2.0 * h * h / (4 * m))
        deviations.append(abs(err - predicted) / predicted)
        result.rows.append({'study_id': 'quadrature_commuting', 'M': m, 'h': h, 'error': err,
                            'deviation': deviations[-1], 'notes': f'predicted={predicted:.6e}'})
    result.check('commuting family matches closed form', max(deviations) <= 1e-6,
                 f'max relative deviation {max(deviations):.3e}')

    result.plot = PlotSpec((
        PanelSpec('quadrature', 'M', 'error', title=f'{family.name}, h = {h:g}'),
        PanelSpec('quadrature_interaction', 'M', 'error', title='interaction picture'),
    ))
    return result


# ==========================
# КОММУТАТОРЫ
# ==========================
def study_commutators_fig1(cfg: StudyConfig) -> StudyResult:
    result = StudyResult(cfg.study)
    t_grid = np.round(np.arange(0.0, 1.0 + 0.5 * cfg.t_step, cfg.t_step), 12)
    taylor: Dict[int, List[float]] = {}
    key: Dict[int, List[float]] = {}
    for n in cfg.n_list:
        ip = interaction_picture(GridSpec(n, cfg.domain_length), cfg.potential)
        split = taylor_split(ip)
        taylor[n] = taylor_term_norm(split, t_grid)
        for t, value in zip(t_grid, taylor[n]):
            result.rows.append({'study_id': 'fig1a_taylor', 'N': n, 'T': float(t), 'error': value})
        # шаг сетки по t не зависит от N, а частота осцилляций растёт с ||A||
        jump = float(np.max(np.abs(np.diff(taylor[n])))) if len(t_grid) > 1 else 0.0
        allowed = split.lipschitz_bound() * cfg.t_step * (1 + 1e-9)
        result.check(f'taylor term continuous in t (N={n})', jump <= allowed,
                     f'max jump {jump:.3e} vs Lipschitz bound {allowed:.3e}')

        key[n] = key_commutator_norm(cfg.potential, n, cfg.h_list, domain_length=cfg.domain_length)
        report = fit_convergence(cfg.h_list, key[n], label=f'key commutator N={n}')
        result.add_report_rows('fig1b_key_commutator', report, N=n)
        result.check_slope(f'key commutator slope (N={n})', report, 1.7, 2.3, residual_tol=_residual_tol(cfg))

        first = first_commutator_norm(cfg.potential, n, cfg.h_list, domain_length=cfg.domain_length)
        for h, value in zip(cfg.h_list, first):
            result.rows.append({'study_id': 'fig1b_first_commutator', 'N': n, 'h': h, 'error': value})

    n_sorted = sorted(cfg.n_list)
    if len(n_sorted) > 1:
        for idx, h in enumerate(cfg.h_list):
            values = [key[n][idx] for n in n_sorted]
            result.check(f'key commutator varies <= 50% across N at h={h:g}',
                         max(values) <= 1.5 * min(values), f'values={["%.4e" % v for v in values]}')
        last = len(t_grid) - 1
        at_one = [taylor[n][last] for n in n_sorted]
        result.check('taylor term grows >= 2x from smallest to largest N at t=1', at_one[-1] >= 2 * at_one[0],
                     f'values={["%.4e" % v for v in at_one]}')
        result.check('taylor term nondecreasing in N at t=1',
                     all(b >= a for a, b in zip(at_one, at_one[1:])))

    result.plot = PlotSpec((
        PanelSpec('fig1a_taylor', 'T', 'error', xscale='linear', yscale='linear',
                  title='Taylor term', xlabel='t', ylabel='norm'),
        PanelSpec('fig1b_key_commutator', 'h', 'error', title='key commutator', ylabel='norm'),
    ))
    return result


# ==========================
# БЛОЧНЫЕ КОДИРОВКИ
# ==========================
def _off_diagonal_in_k(matrix: np.ndarray, m: int) -> float:
    size = matrix.shape[0] // m
    worst = 0.0
    for a in range(m):
        for b in range(m):
            if a != b:
                worst = max(worst, float(np.max(np.abs(matrix[a * size:(a + 1) * size, b * size:(b + 1) * size]))))
    return worst


def study_block_encoding(cfg: StudyConfig) -> StudyResult:
    result = StudyResult(cfg.study)
    h_t = random_smooth_family(2 ** cfg.n_s, cfg.seed)
    alpha = h_t.alpha
    h = 0.5 / alpha
    j = 1
    gate_ops = None
    for m in cfg.m_list:
        target = assemble_lcu_target(h_t, j, h, m, alpha).entries
        lcu_dev = float(np.max(np.abs(target - 1j * omega2_riemann(h_t, j * h, h, m).matrix)))
        result.check(f'LCU target equals i*Omega2 (M={m})', lcu_dev <= 1e-13, f'{lcu_dev:.3e}')

        oracle = ham_t_oracle(h_t, j, h, m, alpha)
        samples = [h_t.sample_array(j * h + k * h / m) for k in range(m)]
        ham_dev = verify_block_encoding(oracle, sla.block_diag(*samples), 1e-12)
        off_k = _off_diagonal_in_k(oracle.unitary.matrix, m)
        result.check(f'HAM-T blocks match samples (M={m})', ham_dev.passed and off_k <= 1e-13,
                     f'deviation {ham_dev.deviation:.3e}, off-diagonal {off_k:.3e}')

        fit, _, _ = fig1_report(h_t, j, h, m, alpha, 'exact_factor')
        result.check(f'LCU circuit block proportional to target (M={m})', fit.residual <= 1e-9,
                     f'residual {fit.residual:.3e}, factor {fit.factor:.10g} vs {2 * alpha * h:.10g}')

        step = exponentiate_block_encoding(fig1_block_encoding(h_t, j, h, m, alpha), 1.0).block()
        exp_dev = float(np.max(np.abs(step - step_unitary(omega2_riemann(h_t, j * h, h, m)).matrix)))
        result.check(f'exponentiated block equals Magnus step (M={m})', exp_dev <= 1e-11, f'{exp_dev:.3e}')

        result.rows.append({
            'study_id': 'block_encoding', 'N': 2 ** cfg.n_s, 'h': h, 'M': m,
            'deviation': max(lcu_dev, ham_dev.deviation, fit.residual, exp_dev),
            'constant': fit.factor, 'notes': f'claimed_factor={2 * alpha * h:.10e};phase={fit.phase:.3e}',
        })
        arccos_fit, _, _ = fig1_report(h_t, j, h, m, alpha, 'arccos')
        result.rows.append({
            'study_id': 'block_encoding_arccos_angle', 'N': 2 ** cfg.n_s, 'h': h, 'M': m,
            'deviation': arccos_fit.residual, 'constant': arccos_fit.factor,
            'notes': f'phase={arccos_fit.phase:.3e}',
        })
        gate_ops = fig1_gate_list(h_t, j, h, m, alpha)

    for n_m in range(1, 5):
        perm = comp_oracle(n_m).matrix
        size = 2 ** n_m
        mismatches = 0
        for p in range(size):
            for q in range(size):
                for f in (0, 1):
                    src = (p * size + q) * 2 + f
                    expected = (p * size + q) * 2 + (f if q < p else 1 - f)
                    mismatches += int(abs(perm[expected, src] - 1) > 0)
        result.rows.append({'study_id': 'comp_oracle', 'M': size, 'deviation': float(mismatches)})
        result.check(f'COMP oracle on all basis states (n_m={n_m})', mismatches == 0)

    ip = interaction_picture(GridSpec(4), cfg.potential)
    for m in (2, 4):
        ip_block = interaction_ham_t(ip, j, 0.25, m).block()
        ref = ham_t_oracle(interaction_hamiltonian(ip, frame='grid'), j, 0.25, m, float(ip.alpha_b)).block()
        dev = float(np.max(np.abs(ip_block - ref)))
        result.rows.append({'study_id': 'interaction_ham_t', 'N': 4, 'h': 0.25, 'M': m, 'deviation': dev})
        result.check(f'interaction HAM-T matches sampled H_I (M={m})', dev <= 1e-11, f'{dev:.3e}')

    if gate_ops is not None:
        ops, layout = gate_ops
        result.artifacts[f'{cfg.study}_gates.json'] = gate_list_to_json(ops, layout)
    return result


# ==========================
# РЕСУРСЫ
# ==========================
RESOURCE_THETAS = (2.0, 4.0)
RESOURCE_T = (1.0, 2.0, 5.0, 10.0, 20.0)
RESOURCE_EPS = tuple(float(e) for e in np.logspace(-1, -6, 10))


def study_resources(cfg: StudyConfig) -> StudyResult:
    result = StudyResult(cfg.study)
    plans = {}
    for theta in RESOURCE_THETAS:
        for t_total in RESOURCE_T:
            for eps in RESOURCE_EPS:
                plan = plan_resources(CostQuery(1.0, t_total, eps, 1.0, theta, 1.0))
                plans[theta, t_total, eps] = plan
                result.rows.append({
                    'study_id': 'resources', 'L': plan.n_steps_L, 'M': plan.quad_points_M, 'T': t_total,
                    'h': plan.step_h, 'error': eps, 'constant': plan.ham_t_queries,
                    'deviation': plan.budget / (3 * eps), 'notes': f'theta={theta:g}',
                })
    result.check('budget identity holds after rounding', all(p.budget_holds() for p in plans.values()))

    monotone = True
    for theta in RESOURCE_THETAS:
        for t_total in RESOURCE_T:
            series = [plans[theta, t_total, eps] for eps in RESOURCE_EPS]
            for a, b in zip(series, series[1:]):
                monotone &= (b.n_steps_L >= a.n_steps_L and b.quad_points_M >= a.quad_points_M
                             and b.ham_t_queries >= a.ham_t_queries)
    result.check('plans monotone in epsilon', monotone)
    result.check('theta=4 uses no more steps than theta=2',
                 all(plans[4.0, t, e].n_steps_L <= plans[2.0, t, e].n_steps_L
                     for t in RESOURCE_T for e in RESOURCE_EPS))

    params = {'alpha': 1.0, 'alpha_b': 1.0, 'c_comm': 1.0, 'c_h_prime': 1.0, 'c_v': 1.0,
              't_total': 1.0, 'epsilon': 1e-4}
    for regime, _ in REGIME_CHOICES:
        row = table1_row(regime, params)
        result.rows.append({'study_id': 'table1', 'T': 1.0, 'error': 1e-4, 'constant': row.value,
                            'notes': f'{regime}: {row.expression}'})
    expected = 1 + 10 * math.log(1e4)
    value = table1_row('superconvergence', params).value
    result.check('superconvergence row evaluates', abs(value - expected) <= 1e-12 * expected, f'{value:.12g}')
    return result


# ==========================
# РЕЕСТР И ЗАПУСК
# ==========================
STUDIES: Dict[str, Callable[[StudyConfig], StudyResult]] = {
    'superconvergence': study_superconvergence,
    'qhop_baseline': study_qhop_baseline,
    'general_order': study_general_order,
    'quadrature': study_quadrature,
    'commutators_fig1': study_commutators_fig1,
    'block_encoding': study_block_encoding,
    'resources': study_resources,
}

_INTERACTION_DEFAULTS = {
    'n_points': 128,
    'h_list': (0.2, 0.1, 0.05, 0.025, 0.0125),
    'l_list': (5, 10, 20, 40),
    'n_list': (64, 128, 256),
    't_total': 1.0,
}

STUDY_DEFAULTS: Dict[str, Dict[str, Any]] = {
    'superconvergence': dict(_INTERACTION_DEFAULTS),
    'qhop_baseline': dict(_INTERACTION_DEFAULTS, n_list=()),
    'general_order': {
        'family': 'bloch_cos',
        'h_list': (0.4, 0.2, 0.1, 0.05, 0.025),
        'l_list': (8, 16, 32, 64),
        't_total': 1.0,
    },
    'quadrature': {'family': 'bloch_cos', 'h_list': (0.1,), 'm_list': (4, 8, 16, 32, 64), 'n_points': 32},
    'commutators_fig1': {'n_list': (64, 128, 256), 'h_list': (0.05, 0.1, 0.2, 0.5, 1.0), 't_step': 0.01},
    'block_encoding': {'n_s': 1, 'm_list': (2, 4)},
    'resources': {},
}


def build_config(document: Dict[str, Any]) -> StudyConfig:
    return load_study_config(document, defaults=STUDY_DEFAULTS.get(document.get('study'), {}))


def run(cfg: StudyConfig) -> StudyResult:
    """Выполняет исследование и пишет CSV, SVG и JSON в cfg.out_dir."""
    logger.info("study %s started (config %s)", cfg.study, cfg.config_hash()[:12])
    result = STUDIES[cfg.study](cfg)
    out_dir = Path(cfg.out_dir)
    csv_path = write_study_csv(out_dir / f'{cfg.study}.csv', result.rows, cfg.study, cfg.config_hash())
    result.paths['csv'] = csv_path
    if cfg.plot and result.plot is not None:
        result.paths['svg'] = emit_plot(csv_path, result.plot, out_dir / f'{cfg.study}.svg')
    for name, payload in result.artifacts.items():
        result.paths[name] = write_json(out_dir / name, payload)
    for check in result.checks:
        if not check.conclusive:
            logger.warning("%s: inconclusive (%s)", check.name, check.detail)
        elif not check.passed:
            logger.warning("%s: FAILED (%s)", check.name, check.detail)
        else:
            logger.debug("%s: ok (%s)", check.name, check.detail)
    logger.info("study %s finished with exit code %d; wrote %s", cfg.study, result.exit_code,
                ', '.join(str(p) for p in result.paths.values()))
    return result
