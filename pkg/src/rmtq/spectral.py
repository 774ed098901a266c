"""Dense Hermitian spectral tools.

Eigendecomposition with a reproducible eigenvector phase convention, gap
extraction and rescaling, eigenvector overlap matrices, and two-resolvent
trace observables computed in the eigenbasis (no explicit inverses).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from rmtq.ensembles import HermitianMatrix
from rmtq.errors import InputError, RejectedSampleError

__all__ = [
    "SpectralData",
    "GapSample",
    "OverlapMatrix",
    "eigh",
    "gaps",
    "rescaled_gap",
    "overlaps",
    "resolvent_trace_product",
    "im_trace",
]


@dataclass(frozen=True)
class SpectralData:
    """Ascending eigenvalues and (optionally) orthonormal eigenvectors.

    Column ``i`` of ``eigenvectors`` belongs to ``eigenvalues[i]``.  The phase
    of each column is fixed so its largest-magnitude component is real and
    positive, which makes logs reproducible (overlaps are phase-invariant).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def require_vectors(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise InputError("eigenvectors were not computed; call eigh(want_vectors=True)")
        return self.eigenvectors


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[idx, np.arange(vectors.shape[1])]
    mag = np.abs(lead)
    mag[mag == 0.0] = 1.0
    return vectors * (mag / lead)[None, :] if np.iscomplexobj(vectors) else vectors * np.sign(lead)[None, :]


def eigh(h: HermitianMatrix, want_vectors: bool = False) -> SpectralData:
    """Full Hermitian eigendecomposition, eigenvalues ascending."""
    arr = h.array
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix contains non-finite entries")
    if want_vectors:
        lam, vec = np.linalg.eigh(arr)
        return SpectralData(lam, _fix_phases(vec))
    return SpectralData(np.linalg.eigvalsh(arr))


def gaps(sd: SpectralData) -> np.ndarray:
    """Consecutive raw gaps, length n-1, all >= 0."""
    if sd.n < 2:
        raise InputError("need at least two eigenvalues to form gaps")
    return np.diff(sd.eigenvalues)


@dataclass(frozen=True)
class GapSample:
    """One rescaled gap s = N * rho(lambda_i) * (lambda_{i+1} - lambda_i)."""

    index: int
    gap: float
    rho: float
    s: float


def rescaled_gap(sd: SpectralData, i: int, rho_at: Callable[[float], float]) -> GapSample:
    """Rescale the i-th gap (1-based, 1 <= i <= n-1) by the local density."""
    if not 1 <= i <= sd.n - 1:
        raise InputError(f"gap index {i} outside [1, {sd.n - 1}]")
    lam_i = float(sd.eigenvalues[i - 1])
    gap = float(sd.eigenvalues[i] - sd.eigenvalues[i - 1])
    rho = float(rho_at(lam_i))
    if rho <= 0.0:
        raise RejectedSampleError(f"density {rho:.3g} <= 0 at lambda_{i} = {lam_i:.6g}")
    return GapSample(index=i, gap=gap, rho=rho, s=sd.n * rho * gap)


@dataclass(frozen=True)
class OverlapMatrix:
    """Squared eigenvector overlaps o_ij = |<u_i, v_j>|^2 for index ranges."""

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def row_sums(self) -> np.ndarray:
        return self.values.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.values.sum(axis=0)


def _as_indices(sel: Union[Sequence[int], np.ndarray, None], n: int) -> np.ndarray:
    if sel is None:
        return np.arange(n)
    idx = np.asarray(sel, dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise InputError("overlap index selection out of range")
    return idx


def overlaps(
    sd1: SpectralData,
    sd2: SpectralData,
    rows: Union[Sequence[int], np.ndarray, None] = None,
    cols: Union[Sequence[int], np.ndarray, None] = None,
) -> OverlapMatrix:
    """|<u_i, v_j>|^2 for i in rows, j in cols (0-based; None = all)."""
    u = sd1.require_vectors()
    v = sd2.require_vectors()
    if sd1.n != sd2.n:
        raise InputError("overlap requires equal dimensions")
    r = _as_indices(rows, sd1.n)
    c = _as_indices(cols, sd2.n)
    cross = u[:, r].conj().T @ v[:, c]
    return OverlapMatrix(rows=r, cols=c, values=np.abs(cross) ** 2)


def _spectral(h: Union[HermitianMatrix, SpectralData], want_vectors: bool) -> SpectralData:
    if isinstance(h, SpectralData):
        if want_vectors:
            h.require_vectors()
        return h
    return eigh(h, want_vectors=want_vectors)


def resolvent_trace_product(
    h1: Union[HermitianMatrix, SpectralData],
    h2: Union[HermitianMatrix, SpectralData],
    z1: complex,
    z2: complex,
    obs: HermitianMatrix | np.ndarray | None = None,
) -> complex:
    """<G_1 G_2 obs> with G_r = (H_r - z_r)^{-1}, via spectral decomposition.

    Cost is O(N^2) once the two decompositions are known:
    <G1 G2 A> = (1/N) sum_ij (u_i* v_j)(v_j* A u_i) / ((lam_i - z1)(mu_j - z2)).
    """
    z1 = complex(z1)
    z2 = complex(z2)
    if z1.imag == 0.0 or z2.imag == 0.0:
        raise InputError("spectral parameters must be off the real axis")
    sd1 = _spectral(h1, want_vectors=True)
    sd2 = _spectral(h2, want_vectors=True)
    if sd1.n != sd2.n:
        raise InputError("resolvent product requires equal dimensions")
    u = sd1.require_vectors()
    v = sd2.require_vectors()
    weights = 1.0 / np.multiply.outer(sd1.eigenvalues - z1, sd2.eigenvalues - z2)
    cross = u.conj().T @ v
    if obs is None:
        total = np.sum(np.abs(cross) ** 2 * weights)
    else:
        a_arr = obs.array if isinstance(obs, HermitianMatrix) else np.asarray(obs)
        back = v.conj().T @ (a_arr @ u)  # back[j, i] = v_j* A u_i
        total = np.sum(cross * back.T * weights)
    return complex(total / sd1.n)


def im_trace(h: Union[HermitianMatrix, SpectralData], z: complex) -> float:
    """<Im G(z)> = (1/N) sum_i eta / ((lam_i - E)^2 + eta^2)."""
    z = complex(z)
    if z.imag == 0.0:
        raise InputError("spectral parameter must be off the real axis")
    sd = _spectral(h, want_vectors=False)
    lam = sd.eigenvalues
    return float(np.mean(z.imag / ((lam - z.real) ** 2 + z.imag**2)))
