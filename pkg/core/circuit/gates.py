"""
Регистры, описания вентилей и плотное применение вентилей к матрице столбцов.

Порядок кубитов глобальный: первый регистр разметки является старшим.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from math import cos, sin, sqrt
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from core.exceptions import CircuitWiringError, DimensionMismatchError
from core.physics.operators import DenseUnitary


# ==========================
# РЕГИСТРЫ
# ==========================
@dataclass(frozen=True)
class Register:
    name: str
    width: int
    # projected=True: регистр проецируется на |0> при извлечении блока
    projected: bool


@dataclass(frozen=True)
class RegisterLayout:
    registers: Tuple[Register, ...]

    def __post_init__(self) -> None:
        names = [r.name for r in self.registers]
        if len(set(names)) != len(names):
            raise CircuitWiringError(f"duplicate register names in layout: {names}")
        if any(r.width < 0 for r in self.registers):
            raise CircuitWiringError("register widths must be non-negative")

    @property
    def n_qubits(self) -> int:
        return sum(r.width for r in self.registers)

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def n_projected(self) -> int:
        return sum(r.width for r in self.registers if r.projected)

    @property
    def kept_dim(self) -> int:
        return 2 ** (self.n_qubits - self.n_projected)

    def width(self, name: str) -> int:
        return self._register(name).width

    def wires(self, name: str) -> Tuple[int, ...]:
        offset = 0
        for reg in self.registers:
            if reg.name == name:
                return tuple(range(offset, offset + reg.width))
            offset += reg.width
        raise CircuitWiringError(f"no register named {name!r}")

    def wire(self, name: str) -> int:
        wires = self.wires(name)
        if len(wires) != 1:
            raise CircuitWiringError(f"register {name!r} has {len(wires)} qubits, expected one")
        return wires[0]

    def projected_mask(self) -> List[bool]:
        mask: List[bool] = []
        for reg in self.registers:
            mask.extend([reg.projected] * reg.width)
        return mask

    def _register(self, name: str) -> Register:
        for reg in self.registers:
            if reg.name == name:
                return reg
        raise CircuitWiringError(f"no register named {name!r}")

    # -- фабрики ------------------------------------------------------------
    @classmethod
    def fig1(cls, n_s: int, n_a: int, n_m: int) -> 'RegisterLayout':
        """c1, c2 (p), c3 (q), q1 (флаг COMP / Ry), q2, q3, q4, система."""
        return cls((
            Register('c1', 1, True),
            Register('c2', n_m, True),
            Register('c3', n_m, True),
            Register('q1', 1, True),
            Register('q2', 1, True),
            Register('q3', n_a, True),
            Register('q4', n_a, True),
            Register('system', n_s, False),
        ))

    @classmethod
    def ham_t(cls, n_s: int, n_m: int, n_a: int = 1) -> 'RegisterLayout':
        return cls((
            Register('index', n_m, False),
            Register('ancilla', n_a, True),
            Register('system', n_s, False),
        ))

    @classmethod
    def dilation(cls, n_s: int, n_a: int = 1) -> 'RegisterLayout':
        return cls((Register('ancilla', n_a, True), Register('system', n_s, False)))

    @classmethod
    def comp(cls, n_m: int) -> 'RegisterLayout':
        return cls((Register('p', n_m, False), Register('q', n_m, False), Register('flag', 1, False)))


# ==========================
# ВЕНТИЛИ
# ==========================
class GateKind(str, Enum):
    HADAMARD = 'hadamard'
    S_GATE = 's_gate'
    PAULI_Z = 'pauli_z'
    RY = 'ry'
    SWAP = 'swap'
    COMP = 'comp'
    HAM_T = 'ham_t'
    CUSTOM = 'custom_unitary'


_SQRT2_INV = 1 / sqrt(2)
_FIXED_1Q = {
    GateKind.HADAMARD: np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    GateKind.S_GATE: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.PAULI_Z: np.array([[1, 0], [0, -1]], dtype=complex),
}


def ry_matrix(theta: float) -> np.ndarray:
    """Ry(θ) = exp(-iθY/2)."""
    return np.array([[cos(theta / 2), -sin(theta / 2)], [sin(theta / 2), cos(theta / 2)]], dtype=complex)


def swap_matrix(width: int) -> np.ndarray:
    """Перестановка |a>|b> -> |b>|a> для двух регистров ширины width."""
    d = 2 ** width
    perm = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            perm[b * d + a, a * d + b] = 1.0
    return perm


@dataclass(frozen=True, eq=False)
class GateOp:
    kind: GateKind
    wires: Tuple[int, ...]
    controls: Tuple[Tuple[int, int], ...] = ()
    params: Tuple[float, ...] = ()
    label: str = ''
    matrix: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, 'kind', GateKind(self.kind))
        object.__setattr__(self, 'wires', tuple(int(w) for w in self.wires))
        object.__setattr__(self, 'controls', tuple((int(q), int(p)) for q, p in self.controls))
        control_wires = [q for q, _ in self.controls]
        if len(set(self.wires)) != len(self.wires):
            raise CircuitWiringError(f"{self.kind.value}: repeated target wires {self.wires}")
        if len(set(control_wires)) != len(control_wires):
            raise CircuitWiringError(f"{self.kind.value}: repeated control wires {control_wires}")
        if set(control_wires) & set(self.wires):
            raise CircuitWiringError(f"{self.kind.value}: controls {control_wires} overlap targets {self.wires}")
        if any(p not in (0, 1) for _, p in self.controls):
            raise CircuitWiringError(f"{self.kind.value}: control polarity must be 0 or 1")
        if self.kind in (GateKind.COMP, GateKind.HAM_T, GateKind.CUSTOM) and self.matrix is None:
            raise CircuitWiringError(f"{self.kind.value} gate needs an explicit matrix")
        if self.kind is GateKind.RY and len(self.params) != 1:
            raise CircuitWiringError("ry gate takes exactly one angle")

    def unitary(self) -> np.ndarray:
        if self.kind in _FIXED_1Q:
            base = _FIXED_1Q[self.kind]
        elif self.kind is GateKind.RY:
            base = ry_matrix(self.params[0])
        elif self.kind is GateKind.SWAP:
            if len(self.wires) % 2:
                raise CircuitWiringError("swap needs an even number of wires")
            base = swap_matrix(len(self.wires) // 2)
        else:
            base = np.asarray(self.matrix, dtype=complex)
        if base.shape != (2 ** len(self.wires),) * 2:
            raise DimensionMismatchError(
                f"{self.kind.value}: matrix shape {base.shape} does not fit {len(self.wires)} wires")
        return base

    def to_dict(self) -> Dict:
        return {
            'kind': self.kind.value,
            'wires': list(self.wires),
            'controls': [list(c) for c in self.controls],
            'params': [float(p) for p in self.params],
            'label': self.label,
        }


def apply_gate(columns: np.ndarray, n_qubits: int, op: GateOp) -> np.ndarray:
    """Применяет op к каждому столбцу матрицы (2^n x cols).

    Контрольные кубиты фиксируются срезом, целевые оси переносятся вперёд
    и умножаются на матрицу вентиля.
    """
    all_wires = list(op.wires) + [q for q, _ in op.controls]
    if any(w < 0 or w >= n_qubits for w in all_wires):
        raise CircuitWiringError(f"{op.kind.value}: wire outside 0..{n_qubits - 1}")
    cols = columns.shape[-1]
    psi = columns.reshape((2,) * n_qubits + (cols,))
    index: List = [slice(None)] * (n_qubits + 1)
    for q, polarity in op.controls:
        index[q] = polarity
    index_t = tuple(index)
    sub = psi[index_t]
    control_set = {q for q, _ in op.controls}
    remaining = [q for q in range(n_qubits) if q not in control_set]
    target_axes = [remaining.index(w) for w in op.wires]
    k = len(op.wires)
    moved = np.moveaxis(sub, target_axes, list(range(k)))
    shape = moved.shape
    updated = (op.unitary() @ moved.reshape(2 ** k, -1)).reshape(shape)
    result = psi.copy()
    result[index_t] = np.moveaxis(updated, list(range(k)), target_axes)
    return result.reshape(2 ** n_qubits, cols)


def circuit_unitary(ops: Sequence[GateOp], layout: RegisterLayout) -> DenseUnitary:
    """Плотная унитарная матрица последовательности вентилей (первый вентиль действует первым)."""
    n = layout.n_qubits
    if n > settings.MAGNUS_MAX_QUBITS:
        raise CircuitWiringError(f"{n} qubits exceed the dense-emulation cap of {settings.MAGNUS_MAX_QUBITS}")
    total = np.eye(layout.dim, dtype=np.complex128)
    for op in ops:
        total = apply_gate(total, n, op)
    return DenseUnitary(total, layout=layout)


def gate_list_to_json(ops: Iterable[GateOp], layout: Optional[RegisterLayout] = None) -> str:
    payload: Dict = {'gates': [op.to_dict() for op in ops]}
    if layout is not None:
        payload['registers'] = [
            {'name': r.name, 'width': r.width, 'wires': list(layout.wires(r.name)), 'projected': r.projected}
            for r in layout.registers
        ]
    return json.dumps(payload, indent=2, sort_keys=True)
