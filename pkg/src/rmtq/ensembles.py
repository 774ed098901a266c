"""Random-matrix and scalar-parameter laws.

Wigner matrices have entries chi/sqrt(N) with standardized chi (mean 0, unit
off-diagonal variance, and vanishing pseudo-variance in the complex class).
Deformed and monoparametric matrices are built on top: H + B and H + x*A.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from rmtq.errors import InputError

__all__ = [
    "SymmetryClass",
    "EntryLaw",
    "HermitianMatrix",
    "DeformationSpec",
    "UniformChi",
    "TruncatedGaussianChi",
    "ParamLaw",
    "EnsembleSpec",
    "sample_wigner",
    "sample_deformed",
    "build_monoparametric",
    "sample_x",
    "goe",
    "gue",
]

_SQRT3 = np.sqrt(3.0)
_SQRT2 = np.sqrt(2.0)


class SymmetryClass(enum.Enum):
    """Symmetry class of the ensemble; fixes beta and the scalar field."""

    REAL_SYMMETRIC = 1
    COMPLEX_HERMITIAN = 2

    @property
    def beta(self) -> int:
        return self.value

    @property
    def dtype(self) -> np.dtype:
        if self is SymmetryClass.REAL_SYMMETRIC:
            return np.dtype(np.float64)
        return np.dtype(np.complex128)


class EntryLaw(enum.Enum):
    """Standardized entry distributions (mean 0, variance 1)."""

    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    UNIFORM = "uniform"

    def draw_real(self, rng: np.random.Generator, size) -> np.ndarray:
        if self is EntryLaw.GAUSSIAN:
            return rng.standard_normal(size)
        if self is EntryLaw.RADEMACHER:
            return rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0
        return rng.uniform(-_SQRT3, _SQRT3, size=size)

    def draw_offdiagonal(
        self, sym: SymmetryClass, rng: np.random.Generator, size
    ) -> np.ndarray:
        """E|chi|^2 = 1 in both classes; E chi^2 = 0 in the complex class."""
        if sym is SymmetryClass.REAL_SYMMETRIC:
            return self.draw_real(rng, size)
        re = self.draw_real(rng, size)
        im = self.draw_real(rng, size)
        return (re + 1j * im) / _SQRT2


@dataclass(frozen=True)
class HermitianMatrix:
    """Dense Hermitian matrix, exactly Hermitian by construction.

    The array is validated (h_ab == conj(h_ba) bit for bit, real diagonal)
    and frozen, so instances are safe to share read-only across threads.
    """

    array: np.ndarray
    sym: SymmetryClass

    def __post_init__(self):
        arr = np.array(self.array, dtype=self.sym.dtype, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError(f"expected a square matrix, got shape {arr.shape}")
        # equal_nan: non-finite entries are caught later, at the eigensolver
        if not np.array_equal(arr, arr.conj().T, equal_nan=True):
            raise InputError("matrix is not exactly Hermitian; use from_lower()")
        arr.flags.writeable = False
        object.__setattr__(self, "array", arr)

    @classmethod
    def from_lower(cls, arr: np.ndarray, sym: SymmetryClass | None = None) -> "HermitianMatrix":
        """Hermitize: keep the strict lower triangle and the real diagonal."""
        arr = np.asarray(arr)
        if sym is None:
            sym = (
                SymmetryClass.COMPLEX_HERMITIAN
                if np.iscomplexobj(arr)
                else SymmetryClass.REAL_SYMMETRIC
            )
        arr = arr.astype(sym.dtype)
        lower = np.tril(arr, -1)
        full = lower + lower.conj().T
        np.fill_diagonal(full, np.real(np.diagonal(arr)))
        return cls(full, sym)

    @property
    def n(self) -> int:
        return self.array.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.array)))

    def normalized_trace(self) -> float:
        return self.trace() / self.n

    def operator_norm(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvalsh(self.array))))

    def add(self, other: "HermitianMatrix", scale: float = 1.0) -> "HermitianMatrix":
        """self + scale*other; exact Hermiticity is preserved entrywise."""
        if other.n != self.n:
            raise InputError(f"dimension mismatch: {self.n} vs {other.n}")
        if other.sym is not self.sym:
            raise InputError("symmetry class mismatch")
        return HermitianMatrix(self.array + float(scale) * other.array, self.sym)


@dataclass(frozen=True)
class DeformationSpec:
    """Fixed deformation B plus direction A, with cached trace statistics.

    ``trace_a`` is <A> = Tr A / N and ``ring_second_moment`` is <Å²> with
    Å = A - <A>.  ``max_norm_b`` bounds the allowed ||B||.
    """

    a: HermitianMatrix
    b: HermitianMatrix | None = None
    max_norm_b: float = 10.0
    trace_a: float = field(init=False)
    ring_second_moment: float = field(init=False)
    norm_b: float = field(init=False)

    def __post_init__(self):
        if self.b is not None:
            if self.b.n != self.a.n:
                raise InputError("A and B dimensions differ")
            if self.b.sym is not self.a.sym:
                raise InputError("A and B symmetry classes differ")
            norm_b = self.b.operator_norm()
            if norm_b > self.max_norm_b:
                raise InputError(f"||B|| = {norm_b:.3g} exceeds bound {self.max_norm_b:.3g}")
        else:
            norm_b = 0.0
        trace_a = self.a.normalized_trace()
        # <Å²> = <A²> - <A>²; <A²> = ||A||_F² / N for Hermitian A.
        mean_sq = float(np.sum(np.abs(self.a.array) ** 2)) / self.a.n
        object.__setattr__(self, "trace_a", trace_a)
        object.__setattr__(self, "ring_second_moment", max(mean_sq - trace_a**2, 0.0))
        object.__setattr__(self, "norm_b", norm_b)

    @property
    def n(self) -> int:
        return self.a.n


@dataclass(frozen=True)
class UniformChi:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise InputError(f"uniform support [{self.lo}, {self.hi}] is empty")

    def draw(self, rng: np.random.Generator) -> float:
        if self.lo == self.hi:
            return self.lo
        return float(rng.uniform(self.lo, self.hi))


@dataclass(frozen=True)
class TruncatedGaussianChi:
    """Standard normal conditioned on |chi| <= cut (resampled, not clipped)."""

    cut: float = 10.0

    def __post_init__(self):
        if self.cut <= 0:
            raise InputError("truncation cut must be positive")

    def draw(self, rng: np.random.Generator) -> float:
        while True:
            value = float(rng.standard_normal())
            if abs(value) <= self.cut:
                return value


@dataclass(frozen=True)
class ParamLaw:
    """Law of the scalar parameter x = N^{-a} * chi with compactly supported chi."""

    a: float = 0.0
    chi: UniformChi | TruncatedGaussianChi = field(default_factory=TruncatedGaussianChi)

    def __post_init__(self):
        if not 0.0 <= self.a < 1.0:
            raise InputError(f"exponent a = {self.a} outside [0, 1)")


@dataclass(frozen=True)
class EnsembleSpec:
    """Full recipe for one random-matrix law."""

    n: int
    sym: SymmetryClass = SymmetryClass.COMPLEX_HERMITIAN
    entries: EntryLaw = EntryLaw.GAUSSIAN
    deform: DeformationSpec | None = None
    param: ParamLaw | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"dimension must be >= 1, got {self.n}")
        if self.deform is not None:
            if self.deform.n != self.n:
                raise InputError("deformation dimension differs from ensemble dimension")
            if self.deform.a.sym is not self.sym:
                raise InputError("deformation symmetry class differs from ensemble")


def sample_wigner(spec: EnsembleSpec, rng: np.random.Generator) -> HermitianMatrix:
    """Draw the pure Wigner part W: entries chi/sqrt(N), exactly Hermitian.

    Diagonal entries are real with variance 2/beta (GOE/GUE convention for the
    Gaussian law; the other laws are scaled to the same diagonal variance).
    """
    n, sym, law = spec.n, spec.sym, spec.entries
    scale = 1.0 / np.sqrt(n)
    diag_scale = np.sqrt(2.0 / sym.beta)
    full = np.zeros((n, n), dtype=sym.dtype)
    if n > 1:
        rows, cols = np.tril_indices(n, -1)
        full[rows, cols] = law.draw_offdiagonal(sym, rng, rows.size) * scale
        full = full + full.conj().T
    diag = law.draw_real(rng, n) * (diag_scale * scale)
    np.fill_diagonal(full, diag)
    return HermitianMatrix(full, sym)


def sample_deformed(spec: EnsembleSpec, rng: np.random.Generator) -> HermitianMatrix:
    """Draw H = W + B (B = 0 when no deformation is configured)."""
    w = sample_wigner(spec, rng)
    if spec.deform is None or spec.deform.b is None:
        return w
    return w.add(spec.deform.b)


def build_monoparametric(
    h: HermitianMatrix, a_mat: HermitianMatrix, x: float
) -> HermitianMatrix:
    """H + x*A, exactly Hermitian; dimensions and classes must match."""
    if x == 0.0:
        return h
    return h.add(a_mat, scale=x)


def sample_x(law: ParamLaw, n: int, rng: np.random.Generator) -> float:
    """One draw of x = N^{-a} * chi."""
    return float(n ** (-law.a)) * law.chi.draw(rng)


def goe(n: int, rng: np.random.Generator) -> HermitianMatrix:
    """Gaussian real-symmetric Wigner (off-diagonal var 1/N, diagonal var 2/N)."""
    return sample_wigner(EnsembleSpec(n=n, sym=SymmetryClass.REAL_SYMMETRIC), rng)


def gue(n: int, rng: np.random.Generator) -> HermitianMatrix:
    """Gaussian complex-Hermitian Wigner (off-diagonal var 1/N, diagonal var 1/N)."""
    return sample_wigner(EnsembleSpec(n=n, sym=SymmetryClass.COMPLEX_HERMITIAN), rng)
