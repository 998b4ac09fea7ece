"""
Оценка порядка сходимости: наклон прямой log(error) ~ log(abscissa).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from django.conf import settings
from sklearn.linear_model import LinearRegression

from core.exceptions import InvalidInputError


@dataclass(frozen=True)
class ConvergenceReport:
    abscissae: tuple
    errors: tuple
    fitted_slope: float
    fitted_log_constant: float
    residual: float
    label: str = ''
    skipped: bool = False
    flags: tuple = field(default_factory=tuple)

    @property
    def conclusive(self) -> bool:
        return not self.skipped and self.residual <= settings.MAGNUS_FIT_RESIDUAL_TOL

    @property
    def constant(self) -> float:
        return math.exp(self.fitted_log_constant) if math.isfinite(self.fitted_log_constant) else math.nan

    def constant_for_order(self, order: float) -> float:
        """Геометрическое среднее error / x^order при фиксированном порядке."""
        x = np.asarray(self.abscissae, dtype=float)
        e = np.asarray(self.errors, dtype=float)
        return float(np.exp(np.mean(np.log(e) - order * np.log(x))))

    def ratios_for_order(self, order: float) -> List[float]:
        return [float(e / x ** order) for x, e in zip(self.abscissae, self.errors)]

    def slope_within(self, low: float, high: float) -> bool:
        return low <= self.fitted_slope <= high


def _strictly_monotone(values: np.ndarray) -> bool:
    d = np.diff(values)
    return bool(np.all(d > 0) or np.all(d < 0))


def fit_convergence(abscissae: Sequence[float], errors: Sequence[float], label: str = '',
                    floor: Optional[float] = None) -> ConvergenceReport:
    """Наклон и свободный член по методу наименьших квадратов на (log x, log e).

    Если все ошибки не превышают floor, аппроксимация не строится (skipped).
    """
    x = np.asarray(abscissae, dtype=float)
    e = np.asarray(errors, dtype=float)
    if x.shape != e.shape or x.ndim != 1:
        raise InvalidInputError("abscissae and errors must be 1-D sequences of equal length")
    if x.size < 2:
        raise InvalidInputError(f"need at least two points to fit a slope, got {x.size}")
    if not np.all(x > 0):
        raise InvalidInputError("abscissae must be positive")
    if not _strictly_monotone(x):
        raise InvalidInputError("abscissae must be strictly monotone")
    if np.any(e < 0) or not np.all(np.isfinite(e)):
        raise InvalidInputError("errors must be finite and non-negative")

    if (floor is not None and np.all(e <= floor)) or np.any(e == 0):
        return ConvergenceReport(tuple(x.tolist()), tuple(e.tolist()), math.nan, math.nan, math.inf,
                                 label=label, skipped=True, flags=('roundoff',))

    log_x = np.log(x).reshape(-1, 1)
    log_e = np.log(e)
    model = LinearRegression()
    model.fit(log_x, log_e)
    slope = float(model.coef_[0])
    intercept = float(model.intercept_)
    residual = float(np.max(np.abs(log_e - model.predict(log_x))))

    flags = []
    # шаги против общего тренда больше допуска по остатку
    order = np.argsort(x)
    trend = np.diff(log_e[order]) * math.copysign(1.0, slope)
    if np.any(trend < -settings.MAGNUS_FIT_RESIDUAL_TOL):
        flags.append('non_monotone')
    if residual > settings.MAGNUS_FIT_RESIDUAL_TOL:
        flags.append('large_residual')
    return ConvergenceReport(tuple(x.tolist()), tuple(e.tolist()), slope, intercept, residual,
                             label=label, flags=tuple(flags))
