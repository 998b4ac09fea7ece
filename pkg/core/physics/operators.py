"""
Эрмитовы операторы лаборатории: дискретный лапласиан, потенциалы,
гамильтониан в картине взаимодействия и общие H(t).

Все типы неизменяемы после создания; операции являются чистыми функциями.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from django.conf import settings
from scipy import linalg as sla

from core.exceptions import (
    DimensionMismatchError,
    EigensolverError,
    InvalidInputError,
    NotHermitianError,
)


logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, 'HermitianMatrix']


def _as_array(m: ArrayLike) -> np.ndarray:
    if isinstance(m, HermitianMatrix):
        return m.entries
    if isinstance(m, DenseUnitary):
        return m.matrix
    return np.asarray(m)


# ==========================
# ТИПЫ
# ==========================
@dataclass(frozen=True)
class GridSpec:
    """Периодическая сетка x_k = k * spacing, k = 0..N-1 (левый конец)."""
    n_points: int
    domain_length: float = 2 * math.pi

    def __post_init__(self) -> None:
        if isinstance(self.n_points, bool) or int(self.n_points) != self.n_points or self.n_points < 2:
            raise InvalidInputError(f"GridSpec.n_points must be an integer >= 2, got {self.n_points!r}")
        if not math.isfinite(self.domain_length) or self.domain_length <= 0:
            raise InvalidInputError(f"GridSpec.domain_length must be positive, got {self.domain_length!r}")
        object.__setattr__(self, 'n_points', int(self.n_points))

    @property
    def spacing(self) -> float:
        return self.domain_length / self.n_points

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n_points) * self.spacing


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Плотная комплексная эрмитова матрица.

    При создании проверяется ||M - M^H||_max <= rtol * ||M||_max,
    после чего матрица симметризуется как (M + M^H) / 2.
    """
    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=np.complex128, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DimensionMismatchError(f"HermitianMatrix needs a non-empty square array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("HermitianMatrix entries must be finite")
        deviation = float(np.max(np.abs(arr - arr.conj().T)))
        scale = float(np.max(np.abs(arr)))
        rtol = settings.MAGNUS_HERMITIAN_RTOL
        if deviation > rtol * scale:
            raise NotHermitianError(
                f"matrix is not Hermitian: max|M - M^H| = {deviation:.3e} > {rtol:.0e} * {scale:.3e}",
                deviation=deviation,
            )
        arr = 0.5 * (arr + arr.conj().T)
        arr.setflags(write=False)
        object.__setattr__(self, 'entries', arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True, eq=False)
class DenseUnitary:
    """Плотная унитарная матрица с необязательной разметкой регистров."""
    matrix: np.ndarray
    layout: Optional[object] = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.matrix, dtype=np.complex128, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatchError(f"DenseUnitary needs a square array, got shape {arr.shape}")
        layout_dim = getattr(self.layout, 'dim', None)
        if layout_dim is not None and layout_dim != arr.shape[0]:
            raise DimensionMismatchError(f"layout describes dim {layout_dim}, matrix has dim {arr.shape[0]}")
        arr.setflags(write=False)
        object.__setattr__(self, 'matrix', arr)
        if self.check:
            defect = self.defect()
            limit = settings.MAGNUS_UNITARY_RTOL * arr.shape[0]
            if defect > limit:
                raise InvalidInputError(f"matrix is not unitary: ||U^H U - I|| = {defect:.3e} > {limit:.1e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def defect(self) -> float:
        gram = self.matrix.conj().T @ self.matrix
        gram[np.diag_indices_from(gram)] -= 1.0
        # Фробениус >= спектральной нормы; SVD только если грубая оценка не проходит
        frob = float(np.linalg.norm(gram))
        if frob <= settings.MAGNUS_UNITARY_RTOL:
            return frob
        return spectral_norm(gram)

    def compose(self, other: 'DenseUnitary') -> 'DenseUnitary':
        """self @ other (other действует первым)."""
        if self.dim != other.dim:
            raise DimensionMismatchError(f"cannot compose dims {self.dim} and {other.dim}")
        return DenseUnitary(self.matrix @ other.matrix, layout=self.layout or other.layout, check=False)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


@dataclass(frozen=True, eq=False)
class TimeHamiltonian:
    """Семплер t -> H(t) с объявленной оценкой нормы alpha и оценками производных."""
    dim: int
    sampler: Callable[[float], ArrayLike]
    alpha: float
    deriv_bound_1: Optional[float] = None
    deriv_bound_2: Optional[float] = None
    name: str = ''

    def __post_init__(self) -> None:
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidInputError(f"TimeHamiltonian.dim must be a positive integer, got {self.dim!r}")
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise InvalidInputError(f"TimeHamiltonian.alpha must be a finite non-negative real, got {self.alpha!r}")

    def sample(self, t: float) -> HermitianMatrix:
        value = self.sampler(float(t))
        h = value if isinstance(value, HermitianMatrix) else HermitianMatrix(value)
        if h.dim != self.dim:
            raise DimensionMismatchError(f"{self.name or 'H(t)'} sampled dim {h.dim} at t={t}, declared {self.dim}")
        return h

    def sample_array(self, t: float) -> np.ndarray:
        return self.sample(t).entries

    def check_alpha(self, times: Sequence[float]) -> float:
        """Выборочная проверка ||H(t)|| <= alpha; возвращает максимум нормы."""
        worst = 0.0
        for t in times:
            worst = max(worst, hermitian_norm(self.sample_array(t)))
        if worst > self.alpha * (1 + 1e-10) + 1e-14:
            raise InvalidInputError(f"{self.name or 'H(t)'}: sampled norm {worst:.6g} exceeds declared alpha {self.alpha:.6g}")
        return worst


@dataclass(frozen=True, eq=False)
class InteractionPicture:
    """H = A + B(t), A быстро перематывается через кешированное спектральное разложение."""
    a_matrix: HermitianMatrix
    b: Union[HermitianMatrix, Callable[[float], ArrayLike]]
    alpha_b: Optional[float] = None
    a_eigvals: np.ndarray = field(init=False, repr=False)
    a_eigvecs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        a = self.a_matrix if isinstance(self.a_matrix, HermitianMatrix) else HermitianMatrix(self.a_matrix)
        object.__setattr__(self, 'a_matrix', a)
        if not callable(self.b):
            b = self.b if isinstance(self.b, HermitianMatrix) else HermitianMatrix(self.b)
            if b.dim != a.dim:
                raise DimensionMismatchError(f"A has dim {a.dim}, B has dim {b.dim}")
            object.__setattr__(self, 'b', b)
            if self.alpha_b is None:
                object.__setattr__(self, 'alpha_b', hermitian_norm(b.entries))
        elif self.alpha_b is None:
            raise InvalidInputError("alpha_b must be declared for a time-dependent B(t)")

        vals, vecs = _eigh(a.entries, what='A')
        recon = (vecs * vals) @ vecs.conj().T
        scale = max(hermitian_norm(a.entries), 1e-300)
        err = spectral_norm(recon - a.entries) / scale
        if err > 1e-10:
            raise EigensolverError(f"eigendecomposition of A reconstructs with relative error {err:.3e}")
        vals.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, 'a_eigvals', vals)
        object.__setattr__(self, 'a_eigvecs', vecs)

    @property
    def dim(self) -> int:
        return self.a_matrix.dim

    @property
    def time_independent(self) -> bool:
        return isinstance(self.b, HermitianMatrix)

    def b_at(self, t: float) -> np.ndarray:
        if self.time_independent:
            return self.b.entries
        value = self.b(float(t))
        return _as_array(value)

    @cached_property
    def b_eigen(self) -> np.ndarray:
        """V^H B V для не зависящего от времени B."""
        return self.to_eigen(self.b_at(0.0))

    @cached_property
    def full_eigh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Спектральное разложение A + B в собственном базисе A: (mu, W)."""
        if not self.time_independent:
            raise InvalidInputError("A + B is only diagonalised for time-independent B")
        h_eig = np.diag(self.a_eigvals).astype(np.complex128) + self.b_eigen
        h_eig = 0.5 * (h_eig + h_eig.conj().T)
        return _eigh(h_eig, what='A + B')

    def to_eigen(self, m: np.ndarray) -> np.ndarray:
        v = self.a_eigvecs
        return v.conj().T @ m @ v

    def to_grid(self, m: np.ndarray) -> np.ndarray:
        v = self.a_eigvecs
        return v @ m @ v.conj().T

    def phases(self, t: float) -> np.ndarray:
        return np.exp(1j * self.a_eigvals * t)

    def conjugate_eigen(self, m_eig: np.ndarray, t: float) -> np.ndarray:
        """D(t) M D(t)^H, D(t) = diag(e^{i lambda t})."""
        d = self.phases(t)
        return (d[:, None] * m_eig) * d.conj()[None, :]

    def fast_forward(self, s: float) -> np.ndarray:
        """O_A(s) = e^{iAs} в базисе сетки."""
        v = self.a_eigvecs
        return (v * self.phases(s)) @ v.conj().T

    @cached_property
    def commutator_ab_norm(self) -> float:
        if not self.time_independent:
            raise InvalidInputError("||[A, B]|| is defined here for time-independent B only")
        return hermitian_norm(1j * commutator(self.a_matrix.entries, self.b.entries))


# ==========================
# ОПЕРАЦИИ
# ==========================
def _eigh(m: np.ndarray, what: str = 'matrix') -> Tuple[np.ndarray, np.ndarray]:
    try:
        vals, vecs = sla.eigh(m, check_finite=True)
    except (sla.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"eigensolver failed for {what}: {exc}") from exc
    return vals, vecs


def spectral_norm(m: ArrayLike) -> float:
    arr = _as_array(m)
    if arr.size == 0:
        return 0.0
    return float(sla.svdvals(arr, check_finite=True)[0])


def hermitian_norm(m: ArrayLike) -> float:
    """Спектральная норма эрмитовой матрицы через собственные значения."""
    arr = _as_array(m)
    vals = sla.eigvalsh(0.5 * (arr + arr.conj().T))
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def commutator(x: ArrayLike, y: ArrayLike) -> np.ndarray:
    a = _as_array(x)
    b = _as_array(y)
    if a.shape != b.shape or a.ndim != 2:
        raise DimensionMismatchError(f"commutator of shapes {a.shape} and {b.shape}")
    result = a @ b - b @ a
    if isinstance(x, HermitianMatrix) and isinstance(y, HermitianMatrix):
        dev = float(np.max(np.abs(result + result.conj().T))) if result.size else 0.0
        scale = 1.0 + float(np.max(np.abs(result)))
        if dev > settings.MAGNUS_SKEW_RTOL * scale:
            raise NotHermitianError(f"[X, Y] of Hermitian inputs is not anti-Hermitian (deviation {dev:.3e})", deviation=dev)
    return result


def unitary_from_hermitian(h: ArrayLike, t: float) -> DenseUnitary:
    """e^{-iht} через спектральное разложение."""
    arr = h.entries if isinstance(h, HermitianMatrix) else HermitianMatrix(h).entries
    vals, vecs = _eigh(arr, what='H')
    return DenseUnitary((vecs * np.exp(-1j * vals * t)) @ vecs.conj().T)


def build_laplacian_1d(grid: GridSpec) -> HermitianMatrix:
    """Центральная разность для -Δ с периодическим замыканием."""
    n = grid.n_points
    inv_dx2 = 1.0 / grid.spacing ** 2
    lap = np.zeros((n, n), dtype=np.complex128)
    idx = np.arange(n)
    np.add.at(lap, (idx, idx), 2.0 * inv_dx2)
    np.add.at(lap, (idx, (idx + 1) % n), -inv_dx2)
    np.add.at(lap, (idx, (idx - 1) % n), -inv_dx2)
    return HermitianMatrix(lap)


def laplacian_dispersion(grid: GridSpec) -> np.ndarray:
    k = np.arange(grid.n_points)
    return (2.0 - 2.0 * np.cos(2 * np.pi * k / grid.n_points)) / grid.spacing ** 2


def build_potential(grid: GridSpec, v: Union[str, Callable[[np.ndarray], np.ndarray]]) -> HermitianMatrix:
    func = resolve_potential(v) if isinstance(v, str) else v
    x = grid.points
    values = np.asarray(func(x))
    if values.shape == ():
        values = np.full(grid.n_points, values)
    if values.shape != (grid.n_points,):
        values = np.array([func(xk) for xk in x])
    if np.iscomplexobj(values):
        if np.max(np.abs(values.imag)) > 0:
            raise InvalidInputError("potential must be real-valued on the grid")
        values = values.real
    values = values.astype(float)
    if not np.all(np.isfinite(values)):
        bad = x[~np.isfinite(values)]
        raise InvalidInputError(f"potential is not finite at x = {bad[:5].tolist()}")
    return HermitianMatrix(np.diag(values).astype(np.complex128))


def interaction_hamiltonian(ip: InteractionPicture, frame: str = 'grid') -> TimeHamiltonian:
    """H_I(t) = e^{iAt} B(t) e^{-iAt}; frame='eigen' возвращает то же в собственном базисе A."""
    if frame not in ('grid', 'eigen'):
        raise InvalidInputError(f"unknown frame {frame!r}")

    if ip.time_independent:
        def sample_eigen(t: float) -> np.ndarray:
            return ip.conjugate_eigen(ip.b_eigen, t)
    else:
        def sample_eigen(t: float) -> np.ndarray:
            return ip.conjugate_eigen(ip.to_eigen(ip.b_at(t)), t)

    if frame == 'eigen':
        sampler = sample_eigen
    else:
        def sampler(t: float) -> np.ndarray:
            return ip.to_grid(sample_eigen(t))

    deriv_1 = deriv_2 = None
    if ip.time_independent:
        # H_I'(t) = i e^{iAt}[A,B]e^{-iAt}, H_I''(t) = -e^{iAt}[A,[A,B]]e^{-iAt}
        a, b = ip.a_matrix.entries, ip.b.entries
        ab = commutator(a, b)
        deriv_1 = hermitian_norm(1j * ab)
        deriv_2 = hermitian_norm(commutator(a, ab))
    return TimeHamiltonian(
        dim=ip.dim,
        sampler=sampler,
        alpha=float(ip.alpha_b),
        deriv_bound_1=deriv_1,
        deriv_bound_2=deriv_2,
        name=f"H_I[{frame}]",
    )


def interaction_picture(grid: GridSpec, potential: Union[str, Callable] = 'cos') -> InteractionPicture:
    """A = дискретный -Δ, B = V(x) на сетке."""
    return InteractionPicture(build_laplacian_1d(grid), build_potential(grid, potential))


# ==========================
# ВСТРОЕННЫЕ СЕМЕЙСТВА
# ==========================
def _gaussian_bump(x: np.ndarray) -> np.ndarray:
    return np.exp(-((x - np.pi) ** 2) / (2 * 0.5 ** 2))


POTENTIALS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'cos': np.cos,
    'zero': lambda x: np.zeros_like(np.asarray(x, dtype=float)),
    'gaussian_bump': _gaussian_bump,
}


def resolve_potential(name: str) -> Callable[[np.ndarray], np.ndarray]:
    try:
        return POTENTIALS[name]
    except KeyError:
        raise InvalidInputError(f"unknown potential {name!r}; expected one of {sorted(POTENTIALS)}") from None


_PAULI = {
    'I': np.eye(2, dtype=np.complex128),
    'X': np.array([[0, 1], [1, 0]], dtype=np.complex128),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    'Z': np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def pauli(name: str) -> np.ndarray:
    return _PAULI[name.upper()].copy()


def constant_hamiltonian(h: ArrayLike, name: str = 'constant') -> TimeHamiltonian:
    hm = h if isinstance(h, HermitianMatrix) else HermitianMatrix(h)
    return TimeHamiltonian(hm.dim, lambda t: hm, alpha=hermitian_norm(hm.entries),
                           deriv_bound_1=0.0, deriv_bound_2=0.0, name=name)


def bloch_cos() -> TimeHamiltonian:
    """H(t) = σz + cos(t) σx."""
    z, x = pauli('Z'), pauli('X')
    return TimeHamiltonian(2, lambda t: z + math.cos(t) * x, alpha=math.sqrt(2.0),
                           deriv_bound_1=1.0, deriv_bound_2=1.0, name='bloch_cos')


def bloch_linear() -> TimeHamiltonian:
    """H(t) = σz + t σx; alpha объявлена для t in [0, 1]."""
    z, x = pauli('Z'), pauli('X')
    return TimeHamiltonian(2, lambda t: z + t * x, alpha=math.sqrt(2.0),
                           deriv_bound_1=1.0, deriv_bound_2=0.0, name='bloch_linear')


def linear_commuting(a: Sequence[float], b: Sequence[float], t_max: float = 1.0) -> TimeHamiltonian:
    """H(t) = diag(a) + t diag(b): все значения коммутируют."""
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if a_arr.shape != b_arr.shape or a_arr.ndim != 1:
        raise DimensionMismatchError("diag(a) and diag(b) must have the same length")
    alpha = float(np.max(np.maximum(np.abs(a_arr), np.abs(a_arr + t_max * b_arr))))
    da, db = np.diag(a_arr).astype(np.complex128), np.diag(b_arr).astype(np.complex128)
    return TimeHamiltonian(a_arr.size, lambda t: da + t * db, alpha=alpha,
                           deriv_bound_1=float(np.max(np.abs(b_arr))), deriv_bound_2=0.0,
                           name='linear_commuting')


def switching(t_switch: float = 0.0) -> TimeHamiltonian:
    """H(t) = σz при t < t_switch, σx после: ограниченное разрывное семейство."""
    z, x = pauli('Z'), pauli('X')
    return TimeHamiltonian(2, lambda t: z if t < t_switch else x, alpha=1.0, name='switching')


def random_smooth_family(dim: int, seed: int, scale: float = 1.0) -> TimeHamiltonian:
    """H(t) = H0 + cos(t) H1 + sin(2t) H2 со случайными эрмитовыми H_i."""
    rng = np.random.default_rng(seed)
    mats = []
    for _ in range(3):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        herm = 0.5 * (g + g.conj().T)
        mats.append(scale * herm / hermitian_norm(herm))
    h0, h1, h2 = mats
    alpha = float(sum(hermitian_norm(m) for m in mats))
    return TimeHamiltonian(
        dim,
        lambda t: h0 + math.cos(t) * h1 + math.sin(2 * t) * h2,
        alpha=alpha,
        deriv_bound_1=float(hermitian_norm(h1) + 2 * hermitian_norm(h2)),
        deriv_bound_2=float(hermitian_norm(h1) + 4 * hermitian_norm(h2)),
        name=f'random_smooth[{seed}]',
    )


TWO_LEVEL_FAMILIES: Dict[str, Callable[[], TimeHamiltonian]] = {
    'bloch_cos': bloch_cos,
    'bloch_linear': bloch_linear,
    'switching': switching,
}
