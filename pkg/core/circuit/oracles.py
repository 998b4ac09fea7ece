"""
Оракулы COMP и HAM-T, блочные кодировки, извлечение и проверка блока,
классическая замена экспоненцирования блочной кодировки.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy import linalg as sla

from core.circuit.gates import GateKind, GateOp, RegisterLayout, circuit_unitary
from core.exceptions import BlockEncodingError, DimensionMismatchError, InvalidInputError
from core.physics.operators import (
    DenseUnitary,
    InteractionPicture,
    TimeHamiltonian,
    _eigh,
    hermitian_norm,
    spectral_norm,
)


logger = logging.getLogger(__name__)


def n_index_qubits(m: int) -> int:
    """log2(M) для M - степени двойки."""
    if isinstance(m, bool) or int(m) != m or m < 1 or (int(m) & (int(m) - 1)):
        raise InvalidInputError(f"M must be a power of two, got {m!r}")
    return int(m).bit_length() - 1


def n_system_qubits(dim: int) -> int:
    if dim < 1 or dim & (dim - 1):
        raise DimensionMismatchError(f"system dimension {dim} is not a power of two")
    return dim.bit_length() - 1


# ==========================
# COMP
# ==========================
def comp_oracle(n_m: int) -> DenseUnitary:
    """|p>|q>|f> -> |p>|q>|f> при q < p, иначе |p>|q>|f xor 1>."""
    if n_m < 1:
        raise InvalidInputError(f"n_m must be >= 1, got {n_m}")
    size = 2 ** n_m
    dim = 2 * size * size
    perm = np.zeros((dim, dim), dtype=complex)
    for p in range(size):
        for q in range(size):
            for f in (0, 1):
                src = (p * size + q) * 2 + f
                dst = (p * size + q) * 2 + (f if q < p else f ^ 1)
                perm[dst, src] = 1.0
    return DenseUnitary(perm, layout=RegisterLayout.comp(n_m))


# ==========================
# БЛОЧНЫЕ КОДИРОВКИ
# ==========================

def hermitian_dilation(h_tilde: np.ndarray) -> np.ndarray:
    """[[H, S], [S, -H]], S = sqrt(I - H²) через спектр H: S коммутирует с H."""
    h_tilde = np.asarray(h_tilde, dtype=np.complex128)
    w, v = _eigh(0.5 * (h_tilde + h_tilde.conj().T), what='H/alpha')
    if np.max(np.abs(w)) > 1 + 1e-12:
        raise BlockEncodingError(f"||H/alpha|| = {np.max(np.abs(w)):.6g} > 1, dilation impossible")
    w = np.clip(w, -1.0, 1.0)
    h_part = (v * w) @ v.conj().T
    s_part = (v * np.sqrt(1.0 - w * w)) @ v.conj().T
    return np.block([[h_part, s_part], [s_part, -h_part]])


def extract_block(u: DenseUnitary, layout: Optional[RegisterLayout] = None) -> np.ndarray:
    """Проецирует все регистры с projected=True на |0>, остальные сохраняет в исходном порядке."""
    layout = layout or u.layout
    if layout is None:
        raise InvalidInputError("extract_block needs a register layout")
    if layout.dim != u.dim:
        raise DimensionMismatchError(f"layout dim {layout.dim} does not match unitary dim {u.dim}")
    n = layout.n_qubits
    tensor = u.matrix.reshape((2,) * (2 * n))
    index = tuple(0 if projected else slice(None) for projected in layout.projected_mask()) * 2
    kept = layout.kept_dim
    return np.asarray(tensor[index]).reshape(kept, kept)


@dataclass(frozen=True, eq=False)
class BlockEncoding:
    """factor * <0|U|0> приближает target с точностью epsilon."""
    unitary: DenseUnitary
    factor: float
    n_anc: int
    epsilon: float = 0.0
    target: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.unitary.layout is None:
            raise InvalidInputError("block encoding unitary must carry a register layout")
        if self.unitary.layout.n_projected != self.n_anc:
            raise DimensionMismatchError(
                f"layout projects {self.unitary.layout.n_projected} qubits, n_anc = {self.n_anc}")
        if self.target is not None:
            dev = spectral_norm(self.factor * self.block() - self.target)
            scale = 1.0 + spectral_norm(self.target)
            if dev > self.epsilon + 1e-12 * scale:
                raise BlockEncodingError(f"block deviates from target by {dev:.3e} > epsilon {self.epsilon:.1e}")

    @property
    def layout(self) -> RegisterLayout:
        return self.unitary.layout

    def block(self) -> np.ndarray:
        return extract_block(self.unitary)

    def encoded(self) -> np.ndarray:
        return self.factor * self.block()


@dataclass(frozen=True)
class BlockVerification:
    deviation: float
    tol: float
    factor: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol


def verify_block_encoding(be: BlockEncoding, target: np.ndarray, tol: float) -> BlockVerification:
    report = BlockVerification(spectral_norm(be.encoded() - np.asarray(target)), tol, be.factor)
    if not report.passed:
        logger.warning("block encoding deviates from target by %.3e (tol %.1e)", report.deviation, tol)
    return report


# ==========================
# HAM-T
# ==========================
def _sample_blocks(h_t: TimeHamiltonian, t_j: float, h: float, m: int, alpha: float) -> List[np.ndarray]:
    if alpha <= 0:
        raise InvalidInputError(f"alpha must be positive, got {alpha!r}")
    return [h_t.sample_array(t_j + k * h / m) for k in range(m)]


def ham_t_oracle(h_t: TimeHamiltonian, j: int, h: float, m: int, alpha: float) -> BlockEncoding:
    """Σ_k |k><k| ⊗ H(jh + kh/M)/alpha на регистрах index, ancilla, system."""
    n_m = n_index_qubits(m)
    n_s = n_system_qubits(h_t.dim)
    samples = _sample_blocks(h_t, j * h, h, m, alpha)
    dilations = [hermitian_dilation(sample / alpha) for sample in samples]
    layout = RegisterLayout.ham_t(n_s, n_m)
    return BlockEncoding(DenseUnitary(sla.block_diag(*dilations), layout=layout), float(alpha), 1,
                         epsilon=1e-12, target=sla.block_diag(*samples))


def _select(blocks: List[np.ndarray]) -> np.ndarray:
    return sla.block_diag(*blocks)


def interaction_ham_t(ip: InteractionPicture, j: int, h: float, m: int) -> BlockEncoding:
    """HAM-T картины взаимодействия, собранный вентилями:
    O_A(jh) · C[O_A(ph/M)] · O_B(j) · C[O_A(-ph/M)] · O_A(-jh), O_A(s) = e^{iAs}.
    """
    n_m = n_index_qubits(m)
    n_s = n_system_qubits(ip.dim)
    alpha_b = float(ip.alpha_b)
    b_oracle = ham_t_oracle(
        TimeHamiltonian(ip.dim, ip.b_at, alpha_b, name='B'), j, h, m, alpha_b,
    )
    layout = RegisterLayout.ham_t(n_s, n_m)
    index, system = layout.wires('index'), layout.wires('system')
    everything = tuple(range(layout.n_qubits))
    outer = j * h
    ops = [
        GateOp(GateKind.CUSTOM, system, label='O_A(-jh)', matrix=ip.fast_forward(-outer)),
        GateOp(GateKind.CUSTOM, index + system, label='C[O_A(-ph/M)]',
               matrix=_select([ip.fast_forward(-k * h / m) for k in range(m)])),
        GateOp(GateKind.HAM_T, everything, label='O_B(j)', matrix=b_oracle.unitary.matrix),
        GateOp(GateKind.CUSTOM, index + system, label='C[O_A(ph/M)]',
               matrix=_select([ip.fast_forward(k * h / m) for k in range(m)])),
        GateOp(GateKind.CUSTOM, system, label='O_A(jh)', matrix=ip.fast_forward(outer)),
    ]
    return BlockEncoding(circuit_unitary(ops, layout), alpha_b, 1)


# ==========================
# ЭКСПОНЕНЦИРОВАНИЕ
# ==========================
def exponentiate_block_encoding(be: BlockEncoding, t: float) -> BlockEncoding:
    """Блочная кодировка e^{-it·(factor·block)}.

    Классическая замена QSVT: блок экспоненцируется точно и снова вкладывается
    в унитарную матрицу с одним вспомогательным кубитом. Для унитарной E
    дилатация блочно-диагональна: [[E, 0], [0, -E^H]].
    """
    encoded = be.encoded()
    dev = float(np.max(np.abs(encoded - encoded.conj().T))) if encoded.size else 0.0
    if dev > 1e-10 * (1.0 + float(np.max(np.abs(encoded)))):
        raise BlockEncodingError(f"encoded operator is not Hermitian (deviation {dev:.3e})")
    w, v = _eigh(0.5 * (encoded + encoded.conj().T), what='encoded operator')
    evolved = (v * np.exp(-1j * w * t)) @ v.conj().T
    zeros = np.zeros_like(evolved)
    dilated = np.block([[evolved, zeros], [zeros, -evolved.conj().T]])
    layout = RegisterLayout.dilation(n_system_qubits(evolved.shape[0]))
    logger.debug("exponentiated block of dim %d, ||H|| = %.4g, t = %g",
                 evolved.shape[0], hermitian_norm(encoded), t)
    return BlockEncoding(DenseUnitary(dilated, layout=layout), 1.0, 1)
