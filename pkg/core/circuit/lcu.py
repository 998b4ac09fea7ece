"""
Цель блочной кодировки второго порядка и LCU-схема её реализации.

Блок схемы после постселекции:
    (1/(2 alpha M)) Σ_p H_p + i w/(4 M² alpha²) Σ_{q<p} [H_q, H_p],
где w = <0|Ry|0> - <0|Ry|1>. Слагаемые с q > p возвращаются с обратным
знаком коммутатора, поэтому весом служит именно разность.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from core.circuit.gates import GateKind, GateOp, RegisterLayout, circuit_unitary, ry_matrix
from core.circuit.oracles import (
    BlockEncoding,
    comp_oracle,
    extract_block,
    ham_t_oracle,
    n_index_qubits,
    n_system_qubits,
)
from core.exceptions import InvalidInputError, MagnusError
from core.physics.integrators import omega2_riemann
from core.physics.operators import DenseUnitary, HermitianMatrix, TimeHamiltonian


logger = logging.getLogger(__name__)

RY_MODES = ('exact_factor', 'arccos')


def assemble_lcu_target(h_t: TimeHamiltonian, j: int, h: float, m: int, alpha: float) -> HermitianMatrix:
    """Σ_p H_p (h/M) + (i/2) Σ_p [Σ_{q<p} H_q (h/M), H_p] (h/M), t_j = j h."""
    if m < 1 or h <= 0:
        raise InvalidInputError(f"need h > 0 and M >= 1, got h={h!r}, M={m!r}")
    dt = h / m
    t_j = j * h
    samples = [h_t.sample_array(t_j + p * dt) for p in range(m)]
    worst = max(float(np.max(np.abs(np.linalg.eigvalsh(s)))) for s in samples)
    if worst > alpha * (1 + 1e-10):
        raise InvalidInputError(f"sampled ||H|| = {worst:.6g} exceeds alpha = {alpha:.6g}")

    first = sum(samples) * dt
    second = np.zeros_like(first)
    for p in range(1, m):
        inner = sum(samples[:p]) * dt
        second += (inner @ samples[p] - samples[p] @ inner) * dt
    target = HermitianMatrix(first + 0.5j * second)

    reference = 1j * omega2_riemann(h_t, t_j, h, m).matrix
    gap = float(np.max(np.abs(target.entries - reference)))
    if gap > 1e-12 * (1.0 + float(np.max(np.abs(reference)))):
        raise MagnusError(f"LCU target disagrees with i*Omega2 by {gap:.3e}")
    return target


def ry_angle(alpha: float, h: float, mode: str = 'exact_factor') -> float:
    """Угол Ry.

    exact_factor: cos(θ/2) + sin(θ/2) = alpha h, т.е. sin θ = (alpha h)² - 1, θ in [-π/2, 0];
    arccos:       θ = arccos(alpha h).
    """
    ah = alpha * h
    if not (0 < ah <= 1 + 1e-12):
        raise InvalidInputError(f"alpha*h must lie in (0, 1], got {ah:.6g}")
    ah = min(ah, 1.0)
    if mode == 'exact_factor':
        return 2 * math.asin(ah / math.sqrt(2)) - math.pi / 2
    if mode == 'arccos':
        return math.acos(ah)
    raise InvalidInputError(f"unknown ry_mode {mode!r}; expected one of {RY_MODES}")


def commutator_weight(theta: float) -> float:
    ry = ry_matrix(theta)
    return float((ry[0, 0] - ry[0, 1]).real)


def fig1_gate_list(h_t: TimeHamiltonian, j: int, h: float, m: int, alpha: float,
                   ry_mode: str = 'exact_factor') -> Tuple[List[GateOp], RegisterLayout]:
    n_m = n_index_qubits(m)
    if n_m < 1:
        raise InvalidInputError("the LCU circuit needs M >= 2")
    n_s = n_system_qubits(h_t.dim)
    layout = RegisterLayout.fig1(n_s, 1, n_m)
    c1, q1, q2 = layout.wire('c1'), layout.wire('q1'), layout.wire('q2')
    c2, c3 = layout.wires('c2'), layout.wires('c3')
    q3, q4, system = layout.wires('q3'), layout.wires('q4'), layout.wires('system')

    ham_t = ham_t_oracle(h_t, j, h, m, alpha).unitary.matrix
    comp = comp_oracle(n_m).matrix
    theta = ry_angle(alpha, h, ry_mode)

    def hadamards() -> List[GateOp]:
        return [GateOp(GateKind.HADAMARD, (w,)) for w in (c1,) + c2 + c3 + (q2,)]

    def ham(index, controls, name) -> GateOp:
        return GateOp(GateKind.HAM_T, index + q4 + system, controls, label=f'HAM-T_{j}[{name}]', matrix=ham_t)

    ops = hadamards()
    ops += [
        ham(c2, ((c1, 0),), 'p'),
        GateOp(GateKind.COMP, c2 + c3 + (q1,), ((c1, 1),), label='COMP', matrix=comp),
        GateOp(GateKind.PAULI_Z, (q2,), ((c1, 1),)),
        ham(c2, ((c1, 1), (q2, 0)), 'p'),
        GateOp(GateKind.SWAP, q3 + q4, ((c1, 1), (q2, 0))),
        ham(c3, ((c1, 1), (q2, 0)), 'q'),
        ham(c3, ((c1, 1), (q2, 1)), 'q'),
        GateOp(GateKind.SWAP, q3 + q4, ((c1, 1), (q2, 1))),
        ham(c2, ((c1, 1), (q2, 1)), 'p'),
        GateOp(GateKind.RY, (q1,), ((c1, 1),), params=(theta,)),
        GateOp(GateKind.S_GATE, (c1,)),
    ]
    ops += hadamards()
    return ops, layout


def build_fig1_circuit(h_t: TimeHamiltonian, j: int, h: float, m: int, alpha: float,
                       ry_mode: str = 'exact_factor') -> DenseUnitary:
    ops, layout = fig1_gate_list(h_t, j, h, m, alpha, ry_mode)
    return circuit_unitary(ops, layout)


def fig1_block_encoding(h_t: TimeHamiltonian, j: int, h: float, m: int, alpha: float) -> BlockEncoding:
    """(2 alpha h, n_s + 2n_m + 2n_a + 3, 0)-кодировка цели при ry_mode='exact_factor'."""
    u = build_fig1_circuit(h_t, j, h, m, alpha, 'exact_factor')
    return BlockEncoding(u, 2 * alpha * h, u.layout.n_projected)


@dataclass(frozen=True)
class ProportionalityFit:
    """block ≈ scale · target по наименьшим квадратам."""
    scale: complex
    residual: float

    @property
    def magnitude(self) -> float:
        return abs(self.scale)

    @property
    def phase(self) -> float:
        return float(np.angle(self.scale))

    @property
    def factor(self) -> float:
        """Множитель кодировки: target ≈ factor · block."""
        return 1.0 / self.magnitude if self.magnitude > 0 else math.inf


def fit_proportionality(block: np.ndarray, target: np.ndarray) -> ProportionalityFit:
    """residual = ||block - scale·target||_F / (|scale| ||target||_F)."""
    block = np.asarray(block)
    target = np.asarray(target)
    norm2 = float(np.vdot(target, target).real)
    if norm2 == 0:
        raise InvalidInputError("cannot fit proportionality to a zero target")
    scale = complex(np.vdot(target, block) / norm2)
    if scale == 0:
        return ProportionalityFit(scale, math.inf)
    residual = float(np.linalg.norm(block - scale * target) / (abs(scale) * math.sqrt(norm2)))
    return ProportionalityFit(scale, residual)


def fig1_report(h_t: TimeHamiltonian, j: int, h: float, m: int, alpha: float,
                ry_mode: str = 'exact_factor') -> Tuple[ProportionalityFit, np.ndarray, np.ndarray]:
    """Подгонка блока схемы к цели; расхождение множителя с 2 alpha h логируется."""
    target = assemble_lcu_target(h_t, j, h, m, alpha).entries
    block = extract_block(build_fig1_circuit(h_t, j, h, m, alpha, ry_mode))
    fit = fit_proportionality(block, target)
    claimed = 2 * alpha * h
    if abs(fit.factor - claimed) > 1e-9 * claimed or abs(fit.phase) > 1e-9 or fit.residual > 1e-9:
        logger.warning("LCU block (ry_mode=%s): factor %.10g vs claimed %.10g, phase %.3g, residual %.3e",
                       ry_mode, fit.factor, claimed, fit.phase, fit.residual)
    else:
        logger.info("LCU block (ry_mode=%s) matches target with factor %.10g", ry_mode, fit.factor)
    return fit, block, target
