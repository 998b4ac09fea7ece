"""
Калькулятор ресурсов алгоритма второго порядка на длинном времени
и строки сравнительной таблицы сложности запросов.

Константы O(...) считаются равными 1; такие величины помечены как up-to-constant.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from core.exceptions import InvalidInputError


logger = logging.getLogger(__name__)

# Запросы HAM-T и COMP на одно применение LCU-кодировки шага
HAM_T_PER_BLOCK_USE = 5
COMP_PER_BLOCK_USE = 1

REGIME_CHOICES = (
    ('general_H', 'General H(t), commutator scaling'),
    ('general_H_derivative', 'General H(t), derivative-dependent constant'),
    ('superconvergence', 'Interaction picture, superconvergence'),
)

DELTA_RULES = ('closed_form', 'tight')


@dataclass(frozen=True)
class CostQuery:
    alpha: float
    t_total: float
    epsilon: float
    c_h: float
    order_exponent: float
    deriv_sup: float
    n_a: int = 1
    n_m: Optional[int] = None

    def __post_init__(self) -> None:
        for name in ('alpha', 't_total', 'epsilon', 'c_h', 'order_exponent', 'deriv_sup'):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidInputError(f"CostQuery.{name} must be a positive finite number, got {value!r}")
        if self.epsilon >= 1:
            raise InvalidInputError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.t_total <= self.epsilon:
            raise InvalidInputError(f"T must exceed epsilon (T={self.t_total}, epsilon={self.epsilon})")
        if self.order_exponent < 1:
            raise InvalidInputError(f"order exponent theta must be >= 1, got {self.order_exponent}")
        if self.n_a < 1:
            raise InvalidInputError(f"n_a must be >= 1, got {self.n_a}")


@dataclass(frozen=True)
class ResourceEstimate:
    n_steps_raw: float
    n_steps_L: int
    step_h: float
    per_step_delta: float
    delta_tight: float
    delta_prime: float
    quad_points_M: int
    n_m: int
    per_step_queries: float
    ham_t_queries: float
    comp_queries: float
    gate_count: float
    failure_prob_bound: float
    budget: float
    epsilon: float
    block_ancillas: int
    up_to_constant: Tuple[str, ...] = field(
        default=('per_step_queries', 'ham_t_queries', 'comp_queries', 'gate_count', 'quad_points_M'))

    def budget_holds(self) -> bool:
        return self.budget <= 3 * self.epsilon * (1 + 1e-12)

    def as_dict(self) -> Dict[str, float]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__ if k != 'up_to_constant'}


def _ceil(x: float) -> int:
    # x, отличающееся от целого на ошибку округления, не поднимается
    nearest = round(x)
    if abs(x - nearest) <= 1e-9 * max(1.0, abs(x)):
        return max(1, int(nearest))
    return max(1, math.ceil(x))


def truncation_budget(c_h: float, t_total: float, theta: float, n_steps: int) -> float:
    return 2 * c_h * t_total ** (theta + 1) / n_steps ** theta


def plan_resources(q: CostQuery, delta_rule: str = 'closed_form') -> ResourceEstimate:
    """Параметры L, δ, M из доказательства оценки сложности.

    L берётся как потолок замкнутой формулы. delta_rule='closed_form' оставляет
    δ = ε^{1+1/θ} / (C^{1/θ} T^{1+1/θ}), пока потолок L не ломает бюджет (это
    возможно только при L < 1 до округления); 'tight' всегда пересчитывает
    δ = (3ε - 2C T^{θ+1}/L^θ) / L, так что тождество бюджета выполняется с равенством.
    """
    if delta_rule not in DELTA_RULES:
        raise InvalidInputError(f"unknown delta rule {delta_rule!r}")
    theta, eps, t_total, c_h = q.order_exponent, q.epsilon, q.t_total, q.c_h

    l_raw = c_h ** (1 / theta) * t_total ** (1 + 1 / theta) / eps ** (1 / theta)
    n_steps = _ceil(l_raw)
    h = t_total / n_steps
    trunc = truncation_budget(c_h, t_total, theta, n_steps)
    delta_closed = eps ** (1 + 1 / theta) / (c_h ** (1 / theta) * t_total ** (1 + 1 / theta))
    delta_tight = (3 * eps - trunc) / n_steps
    delta = min(delta_closed, delta_tight) if delta_rule == 'closed_form' else delta_tight
    budget = n_steps * delta + trunc
    if budget > 3 * eps * (1 + 1e-12):
        raise InvalidInputError(f"budget identity violated after rounding: {budget:.6g} > {3 * eps:.6g}")

    m_raw = q.deriv_sup * t_total ** (1 - 1 / theta) / (c_h ** (1 / theta) * eps ** (1 - 1 / theta))
    n_quad = _ceil(m_raw)
    n_m = q.n_m if q.n_m is not None else max(1, math.ceil(math.log2(n_quad)))

    # при L = 1 допустимо δ > 1; логарифмический член не бывает отрицательным
    per_step = 2 * q.alpha * h + max(0.0, math.log(1 / delta))
    log_c = max(0.0, math.log(c_h * t_total / eps))
    gates = (q.n_a + max(0.0, math.log(q.deriv_sup * t_total / (c_h * eps)))) * (
        q.alpha * t_total + c_h ** (1 / theta) * t_total ** (1 + 1 / theta) * eps ** (-1 / theta) * log_c
    )
    delta_prime = delta + 2 * c_h * h ** (theta + 1)
    estimate = ResourceEstimate(
        n_steps_raw=l_raw,
        n_steps_L=n_steps,
        step_h=h,
        per_step_delta=delta,
        delta_tight=delta_tight,
        delta_prime=delta_prime,
        quad_points_M=n_quad,
        n_m=n_m,
        per_step_queries=per_step,
        ham_t_queries=HAM_T_PER_BLOCK_USE * n_steps * per_step,
        comp_queries=COMP_PER_BLOCK_USE * n_steps * per_step,
        gate_count=gates,
        failure_prob_bound=2 * n_steps * delta_prime,
        budget=budget,
        epsilon=eps,
        block_ancillas=2 * q.n_a + 2 * n_m + 5,
    )
    logger.debug("plan theta=%g T=%g eps=%g: L=%d delta=%.3e M=%d queries=%.4g",
                 theta, t_total, eps, n_steps, delta, n_quad, estimate.ham_t_queries)
    return estimate


@dataclass(frozen=True)
class Table1Row:
    regime: str
    expression: str
    value: float
    up_to_constant: bool = True


_TABLE1 = {
    'general_H': ('c_comm', 'alpha', 2.0),
    'general_H_derivative': ('c_h_prime', 'alpha', 4.0),
    'superconvergence': ('c_v', 'alpha_b', 4.0),
}


def table1_row(regime: str, params: Dict[str, float]) -> Table1Row:
    """alpha T + C^{1/θ} T^{1+1/θ} ε^{-1/θ} log(C T / ε) для строки режима."""
    if regime not in dict(REGIME_CHOICES):
        raise InvalidInputError(f"unknown regime {regime!r}")
    const_name, norm_name, theta = _TABLE1[regime]
    missing = [k for k in (const_name, norm_name, 't_total', 'epsilon') if params.get(k) is None]
    if missing:
        raise InvalidInputError(f"{regime}: missing constants {missing}")
    c = float(params[const_name])
    norm = float(params[norm_name])
    t_total = float(params['t_total'])
    eps = float(params['epsilon'])
    if c < 0 or norm < 0 or t_total <= 0 or not (0 < eps < 1):
        raise InvalidInputError(f"{regime}: constants out of range")
    value = norm * t_total
    if c > 0:
        value += c ** (1 / theta) * t_total ** (1 + 1 / theta) * eps ** (-1 / theta) * math.log(c * t_total / eps)
    p = int(theta)
    expression = (f"{norm_name}*T + {const_name}^(1/{p}) * T^(1+1/{p}) * eps^(-1/{p}) "
                  f"* log({const_name}*T/eps)")
    return Table1Row(regime, expression, value)


def table1_crossover(c_comm: float, c_h_prime: float) -> float:
    """Шаг h*, ниже которого C'_H h² < C_comm: оценка через производные становится выгоднее."""
    if c_comm <= 0 or c_h_prime <= 0:
        raise InvalidInputError("crossover needs positive C_comm and C'_H")
    return math.sqrt(c_comm / c_h_prime)
