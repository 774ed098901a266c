"""Dyson Brownian motion: matrix flow, OU flow, eigenvalue SDE, covariations.

Brownian convention (fixed here explicitly; it makes the eigenvalue flow
coefficient sqrt(2/(beta N)) come out right): a real symmetric increment has
off-diagonal variance dt and diagonal variance 2 dt; a complex Hermitian one
has E|dB_ab|^2 = dt off the diagonal and real diagonal variance dt.  The
projected noises db_i = sqrt(beta/2) u_i* dB u_i are then standard Brownian
motions with quadratic covariation d[b_i^x, b_j^y] = |<u_i^x, u_j^y>|^2 dt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rmtq import _kernels
from rmtq.ensembles import HermitianMatrix, SymmetryClass, build_monoparametric
from rmtq.errors import InputError, StepSizeError
from rmtq.spectral import eigh

__all__ = [
    "brownian_increment",
    "matrix_dbm_step",
    "ou_step",
    "eigenvalue_dbm_step",
    "project_noise",
    "DbmPath",
    "CovariationResult",
    "measure_quadratic_covariation",
    "coupled_paths",
]

_NORMALS_CHUNK = 512


def brownian_increment(
    n: int, sym: SymmetryClass, dt: float, rng: np.random.Generator
) -> HermitianMatrix:
    """One Hermitian Brownian increment over time dt (see module docstring)."""
    if dt <= 0:
        raise InputError("dt must be positive")
    root = np.sqrt(dt)
    if sym is SymmetryClass.REAL_SYMMETRIC:
        full = np.zeros((n, n))
        if n > 1:
            rows, cols = np.tril_indices(n, -1)
            full[rows, cols] = rng.standard_normal(rows.size) * root
            full = full + full.T
        np.fill_diagonal(full, rng.standard_normal(n) * (np.sqrt(2.0) * root))
        return HermitianMatrix(full, sym)
    full = np.zeros((n, n), dtype=np.complex128)
    if n > 1:
        rows, cols = np.tril_indices(n, -1)
        re = rng.standard_normal(rows.size)
        im = rng.standard_normal(rows.size)
        full[rows, cols] = (re + 1j * im) * (root / np.sqrt(2.0))
        full = full + full.conj().T
    np.fill_diagonal(full, rng.standard_normal(n) * root)
    return HermitianMatrix(full, sym)


def matrix_dbm_step(h: HermitianMatrix, dt: float, rng: np.random.Generator) -> HermitianMatrix:
    """H + dB/sqrt(N): one Euler step of the matrix flow (exact in law)."""
    db = brownian_increment(h.n, h.sym, dt, rng)
    return h.add(db, scale=1.0 / np.sqrt(h.n))


def ou_step(
    h: HermitianMatrix,
    mean: HermitianMatrix,
    dt: float,
    rng: np.random.Generator,
    noise: bool = True,
) -> HermitianMatrix:
    """Euler-Maruyama step of dH = -1/2 (H - mean) dt + dB/sqrt(N).

    ``noise=False`` is a test hook exposing the deterministic relaxation.
    """
    if dt <= 0:
        raise InputError("dt must be positive")
    drift = h.add(mean, scale=-1.0)  # H - mean
    out = h.add(drift, scale=-0.5 * dt)
    if noise:
        db = brownian_increment(h.n, h.sym, dt, rng)
        out = out.add(db, scale=1.0 / np.sqrt(h.n))
    return out


def eigenvalue_dbm_step(
    lams: np.ndarray,
    dt: float,
    rng: np.random.Generator,
    beta: int,
    n_weight: int | None = None,
    step_safety: float = 0.1,
    max_halvings: int = 20,
) -> np.ndarray:
    """Integrate the eigenvalue SDE over duration dt with adaptive substeps.

    d lam_i = sqrt(2/(beta N)) db_i + (1/N) sum_{j != i} dt/(lam_i - lam_j);
    the local substep is capped at step_safety * N * (min gap)^2 and halved on
    an ordering violation, up to ``max_halvings`` consecutive times.
    """
    lams = np.asarray(lams, dtype=np.float64)
    if lams.ndim != 1 or lams.size < 1:
        raise InputError("need a 1-d array of eigenvalues")
    if np.any(np.diff(lams) <= 0):
        raise InputError("initial eigenvalues must be strictly increasing")
    if dt <= 0:
        raise InputError("dt must be positive")
    if beta not in (1, 2):
        raise InputError("beta must be 1 or 2")
    n = lams.size
    weight = n if n_weight is None else int(n_weight)
    cur = lams.copy()
    t_left = float(dt)
    while t_left > 0.0:
        normals = rng.standard_normal((_NORMALS_CHUNK, n))
        advanced, _, status = _kernels.dbm_advance(
            cur, t_left, float(beta), weight, normals, step_safety, max_halvings
        )
        t_left -= advanced
        if status == _kernels.STATUS_ORDER_FAIL:
            raise StepSizeError(
                f"ordering violated after {max_halvings} halvings at t_left={t_left:.3e}"
            )
        if status == _kernels.STATUS_DONE:
            break
    return cur


def project_noise(u: np.ndarray, db: HermitianMatrix, beta: int) -> float:
    """Projected driving noise sqrt(beta/2) * u* dB u (real for Hermitian dB)."""
    val = u.conj() @ (db.array @ u)
    return float(np.sqrt(beta / 2.0) * np.real(val))


@dataclass(frozen=True)
class DbmPath:
    """Stored eigenvalue trajectory of one flow realization."""

    times: np.ndarray
    eigenvalues: np.ndarray  # shape (len(times), n), each row ascending

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise InputError("time grid must be strictly increasing")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,i,lambda\n")
            for t, row in zip(self.times, self.eigenvalues):
                for i, lam in enumerate(row, start=1):
                    fh.write(f"{t:.12g},{i},{lam:.12g}\n")


@dataclass(frozen=True)
class CovariationResult:
    """Empirical quadratic covariation of two projected noises vs the overlap."""

    covariation: float
    overlap_mean: float
    stderr: float
    steps: int
    dt: float


def measure_quadratic_covariation(
    h0: HermitianMatrix,
    a_mat: HermitianMatrix,
    x1: float,
    x2: float,
    i: int,
    j: int,
    dt: float,
    steps: int,
    rng: np.random.Generator,
) -> CovariationResult:
    """Run the matrix flow and compare noise covariation with overlaps.

    At each step the increment dB is projected onto the i-th eigenvector of
    H_t + x1 A and the j-th of H_t + x2 A (1-based indices).  The empirical
    covariation sum db_i db_j / T estimates the path average of
    |<u_i^{x1}, u_j^{x2}>|^2, which is also measured directly.
    """
    if not (1 <= i <= h0.n and 1 <= j <= h0.n):
        raise InputError("eigenvector indices out of range")
    beta = h0.sym.beta
    h = h0
    products = np.empty(steps)
    overlap_sum = 0.0
    for k in range(steps):
        sd1 = eigh(build_monoparametric(h, a_mat, x1), want_vectors=True)
        sd2 = eigh(build_monoparametric(h, a_mat, x2), want_vectors=True)
        u = sd1.eigenvectors[:, i - 1]
        v = sd2.eigenvectors[:, j - 1]
        overlap_sum += float(np.abs(u.conj() @ v) ** 2)
        db = brownian_increment(h.n, h.sym, dt, rng)
        products[k] = project_noise(u, db, beta) * project_noise(v, db, beta)
        h = h.add(db, scale=1.0 / np.sqrt(h.n))
    total_time = steps * dt
    covariation = float(products.sum() / total_time)
    stderr = float(np.std(products, ddof=1) * np.sqrt(steps) / total_time)
    return CovariationResult(
        covariation=covariation,
        overlap_mean=overlap_sum / steps,
        stderr=stderr,
        steps=steps,
        dt=dt,
    )


def _drift_only_advance(lams: np.ndarray, dt: float, n_weight: int, step_safety: float) -> None:
    """Integrate the pure repulsion ODE in place over dt (order-preserving)."""
    t_left = dt
    while t_left > 0.0:
        gap_min = float(np.min(np.diff(lams))) if lams.size > 1 else np.inf
        sub = min(step_safety * n_weight * gap_min * gap_min, t_left)
        drift = np.asarray(_kernels.dbm_drift(lams)) / n_weight
        lams += drift * sub
        t_left -= sub


def coupled_paths(
    h0: HermitianMatrix,
    t_total: float,
    steps: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Matrix flow vs the eigenvalue SDE driven by its projected noises.

    Returns (matrix-flow eigenvalues, SDE eigenvalues) at time t_total.  The
    SDE consumes exactly the increments of the matrix path, so the two should
    agree to O(1/N) at bulk indices over short horizons.
    """
    beta = h0.sym.beta
    n = h0.n
    dt = t_total / steps
    h = h0
    sd = eigh(h, want_vectors=True)
    lams = sd.eigenvalues.copy()
    for _ in range(steps):
        db = brownian_increment(n, h0.sym, dt, rng)
        u = sd.eigenvectors
        projected = np.sqrt(beta / 2.0) * np.real(np.einsum("ai,ab,bi->i", u.conj(), db.array, u))
        lams += np.sqrt(2.0 / (beta * n)) * projected
        order = np.argsort(lams, kind="stable")
        lams = lams[order]
        _drift_only_advance(lams, dt, n, 0.1)
        h = h.add(db, scale=1.0 / np.sqrt(n))
        sd = eigh(h, want_vectors=True)
    return sd.eigenvalues, lams
