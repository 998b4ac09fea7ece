"""
Иерархия исключений лаборатории.

Все ошибки наследуют MagnusError; ошибки входных данных дополнительно
наследуют ValueError, ошибки численных процедур наследуют RuntimeError.
"""
from typing import Any, Dict, Optional


class MagnusError(Exception):
    pass


class InvalidInputError(MagnusError, ValueError):
    pass


class NotHermitianError(InvalidInputError):
    def __init__(self, message: str, deviation: Optional[float] = None) -> None:
        super().__init__(message)
        self.deviation = deviation


class DimensionMismatchError(InvalidInputError):
    pass


class EigensolverError(MagnusError, RuntimeError):
    pass


class ConvergenceError(MagnusError, RuntimeError):
    """Бюджет измельчения исчерпан; gap = расстояние между двумя последними итерациями."""

    def __init__(self, message: str, gap: float, levels: int) -> None:
        super().__init__(f"{message} (gap={gap:.3e} after {levels} levels)")
        self.gap = gap
        self.levels = levels


class BlockEncodingError(InvalidInputError):
    pass


class CircuitWiringError(InvalidInputError):
    pass


class BoundViolation(MagnusError, AssertionError):
    def __init__(self, message: str, abscissa: Any = None, value: float = None, bound: float = None) -> None:
        super().__init__(message)
        self.abscissa = abscissa
        self.value = value
        self.bound = bound


class ConfigError(InvalidInputError):
    """Ошибки конфигурации исследования; errors: словарь {путь поля: [сообщения]}."""

    def __init__(self, errors: Dict[str, list]) -> None:
        self.errors = dict(errors)
        parts = [f"{field}: {'; '.join(str(m) for m in msgs)}" for field, msgs in sorted(self.errors.items())]
        super().__init__("Invalid study config: " + ", ".join(parts))
