"""Matrix Dyson Equation for Wigner-type ensembles.

For Wigner covariance the self-energy is the scalar <M>, so in the eigenbasis
of the deformation D = B + xA the matrix equation collapses to one scalar
fixed point over the spectrum of D:

    m = <(D - z - m)^{-1}>,   Im m(z) * Im z > 0,

with M = diag(1/(d_k - z - m)).  This module solves that equation, continues
it to the real axis to produce the self-consistent density of states, and
derives quantiles, the index map at an energy, stability factors and the
deterministic two-resolvent observable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar

from rmtq.ensembles import DeformationSpec, HermitianMatrix
from rmtq.errors import (
    ContinuationError,
    ConvergenceError,
    InputError,
    StabilitySingularError,
)

__all__ = [
    "DeformationSpectrum",
    "MdeSolution",
    "ScDos",
    "QuantileTable",
    "QuantileShiftReport",
    "semicircle_m",
    "semicircle_rho",
    "semicircle_cdf",
    "solve_mde",
    "support_edges",
    "scdos",
    "quantile",
    "quantiles",
    "index_at_energy",
    "quantile_shift_check",
    "stability_factor",
    "m12_observable",
]

RESIDUAL_ACCEPT = 1e-12


# ---------------------------------------------------------------------------
# Closed forms for the semicircle (D = 0) reference
# ---------------------------------------------------------------------------


def semicircle_m(z: complex | np.ndarray) -> complex | np.ndarray:
    """Stieltjes transform m(z) = (-z + sqrt(z^2 - 4))/2, Herglotz branch.

    The factorized square root sqrt(z-2)*sqrt(z+2) selects the branch with
    m ~ -1/z at infinity and Im m(z) * Im z > 0.
    """
    z = np.asarray(z, dtype=np.complex128)
    w = np.sqrt(z - 2.0) * np.sqrt(z + 2.0)
    out = 0.5 * (-z + w)
    if out.ndim == 0:
        return complex(out)
    return out


def semicircle_rho(e) -> np.ndarray | float:
    """rho_sc(E) = sqrt((4 - E^2)_+) / (2 pi)."""
    e = np.asarray(e, dtype=np.float64)
    val = np.sqrt(np.clip(4.0 - e**2, 0.0, None)) / (2.0 * np.pi)
    return float(val) if val.ndim == 0 else val


def semicircle_cdf(e) -> np.ndarray | float:
    """Integral of rho_sc from -2 to E (clamped outside the support)."""
    e = np.asarray(e, dtype=np.float64)
    x = np.clip(e, -2.0, 2.0)
    val = 0.5 + x * np.sqrt(4.0 - x**2) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi
    return float(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeformationSpectrum:
    """Ascending eigenvalues of the deformation D = B + xA.

    ``basis`` optionally carries the eigenvectors of D (columns, permuted
    consistently with the sort of ``d``) for observables that need to be
    rotated into D's eigenbasis.
    """

    d: np.ndarray
    basis: np.ndarray | None = None

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.ndim != 1 or d.size == 0:
            raise InputError("deformation spectrum must be a nonempty 1-d array")
        if not np.all(np.isfinite(d)):
            raise InputError("deformation spectrum contains non-finite values")
        if np.any(np.diff(d) < 0):
            raise InputError("deformation spectrum must be ascending; use from_*()")
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.size

    @classmethod
    def zero(cls, n: int) -> "DeformationSpectrum":
        return cls(np.zeros(n))

    @classmethod
    def from_matrix(cls, mat: HermitianMatrix, want_basis: bool = False) -> "DeformationSpectrum":
        if want_basis:
            lam, vec = np.linalg.eigh(mat.array)
            return cls(lam, vec)
        return cls(np.linalg.eigvalsh(mat.array))

    @classmethod
    def from_deformation(
        cls, deform: DeformationSpec, x: float, want_basis: bool = False
    ) -> "DeformationSpectrum":
        """Spectrum of D = B + xA (B omitted when the deformation has none)."""
        arr = float(x) * deform.a.array
        if deform.b is not None:
            arr = arr + deform.b.array
        if want_basis:
            lam, vec = np.linalg.eigh(arr)
            return cls(lam, vec)
        return cls(np.linalg.eigvalsh(arr))


@dataclass(frozen=True)
class MdeSolution:
    """Converged solution at one spectral parameter z."""

    z: complex
    m: complex
    m_diag: np.ndarray
    residual: float
    dspec: DeformationSpectrum


# ---------------------------------------------------------------------------
# Scalar fixed-point solver (vectorized over spectral parameters)
# ---------------------------------------------------------------------------


def _initial_guess(d: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.asarray(semicircle_m(z - float(np.mean(d))), dtype=np.complex128)


def _solve_fixed_point(
    d: np.ndarray,
    z: np.ndarray,
    m0: np.ndarray,
    tol: float = 1e-13,
    max_iter: int = 10000,
    damping: float = 0.5,
    newton_at: float = 1e-3,
) -> tuple[np.ndarray, np.ndarray]:
    """Damped fixed point, switching to Newton once the residual is small.

    Returns (m, residual) with residual = |<(D-z-m)^{-1}> - m| elementwise.
    Only still-active entries are iterated, so a few slow points near the
    spectral edges do not make the whole grid expensive.
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    m = np.atleast_1d(np.asarray(m0, dtype=np.complex128)).copy()
    if m.shape != z.shape:
        m = np.broadcast_to(m, z.shape).copy()
    res = np.full(z.shape, np.inf)
    idx = np.arange(z.size)
    for _ in range(max_iter):
        za = z[idx]
        ma = m[idx]
        denom = d[None, :] - (za + ma)[:, None]
        g = np.mean(1.0 / denom, axis=1)
        r = g - ma
        res[idx] = np.abs(r)
        live = np.abs(r) > tol
        if not live.any():
            idx = idx[:0]
            break
        newton = (np.abs(r) < newton_at) & live
        step = damping * r
        if newton.any():
            gp = np.mean(1.0 / denom[newton] ** 2, axis=1)
            safe = np.abs(1.0 - gp) > 1e-8
            step[newton] = np.where(safe, r[newton] / (1.0 - gp), damping * r[newton])
        ma_new = ma + step
        # Herglotz guard: never leave the upper half-plane.
        bad = ma_new.imag <= 0.0
        if bad.any():
            ma_new[bad] = ma[bad] + damping * r[bad]
            still = ma_new.imag <= 0.0
            if still.any():
                ma_new[still] = ma[still] + 0.5j * np.abs(r[still])
        m[idx[live]] = ma_new[live]
        idx = idx[live]
    if idx.size:
        raise ConvergenceError(
            f"MDE fixed point did not converge at {idx.size} point(s)",
            residual=float(res[idx].max()),
        )
    return m, res


def solve_mde(
    dspec: DeformationSpectrum,
    z: complex,
    m0: complex | None = None,
    tol: float = 1e-13,
    max_iter: int = 10000,
) -> MdeSolution:
    """Solve m = <(D - z - m)^{-1}> at one off-axis spectral parameter.

    For Im z < 0 the Herglotz reflection m(conj z) = conj(m(z)) is used.
    Accepted solutions always satisfy residual <= 1e-12.
    """
    z = complex(z)
    if z.imag == 0.0:
        raise InputError("solve_mde needs Im z != 0; use scdos() for the real axis")
    if z.imag < 0.0:
        sol = solve_mde(dspec, np.conj(z), None if m0 is None else np.conj(m0), tol, max_iter)
        return MdeSolution(z, np.conj(sol.m), np.conj(sol.m_diag), sol.residual, dspec)
    guess = _initial_guess(dspec.d, np.asarray(z)) if m0 is None else np.complex128(m0)
    m_arr, res_arr = _solve_fixed_point(dspec.d, np.asarray([z]), np.asarray([guess]), tol, max_iter)
    m = complex(m_arr[0])
    m_diag = 1.0 / (dspec.d - z - m)
    residual = float(np.abs(np.mean(m_diag) - m))
    if residual > RESIDUAL_ACCEPT:
        raise ConvergenceError("MDE residual above acceptance threshold", residual=residual)
    return MdeSolution(z=z, m=m, m_diag=m_diag, residual=residual, dspec=dspec)


# ---------------------------------------------------------------------------
# Support edges of the self-consistent density
# ---------------------------------------------------------------------------


def support_edges(dspec: DeformationSpectrum) -> list[tuple[float, float]]:
    """Support components of the scDos via the edge condition.

    Writing w = z + m(z), the scalar equation inverts to z(w) = w - s(w) with
    s(w) = <(D - w)^{-1}>; spectral edges are the critical points z(w*) with
    s'(w*) = <(D - w*)^{-2}> = 1 for real w* outside the atoms of D.
    """
    d = dspec.d
    n = d.size

    def sprime_minus_one(w: float) -> float:
        return float(np.mean(1.0 / (d - w) ** 2)) - 1.0

    def z_of_w(w: float) -> float:
        return float(w - np.mean(1.0 / (d - w)))

    roots: list[float] = []
    # Outer roots: exactly one on each side of the atoms.
    close = 0.5 / np.sqrt(n)  # near the closest atom the mean of squares exceeds 1
    lo_in, hi_in = d[0] - close, d[-1] + close
    span = max(1.0, float(d[-1] - d[0]))
    a = d[0] - span - 2.0
    while sprime_minus_one(a) > 0.0:
        a = d[0] - 2.0 * (d[0] - a)
    roots.append(brentq(sprime_minus_one, a, lo_in, xtol=1e-14, rtol=8.9e-16))
    b = d[-1] + span + 2.0
    while sprime_minus_one(b) > 0.0:
        b = d[-1] + 2.0 * (b - d[-1])
    roots.append(brentq(sprime_minus_one, hi_in, b, xtol=1e-14, rtol=8.9e-16))
    # Interior gaps: a gap of width g can only open once g^2 > 8/n.
    gaps_d = np.diff(d)
    min_width = np.sqrt(8.0 / n)
    for k in np.nonzero(gaps_d > min_width)[0]:
        lo, hi = d[k] + close, d[k + 1] - close
        if lo >= hi:
            continue
        opt = minimize_scalar(sprime_minus_one, bounds=(lo, hi), method="bounded")
        if opt.fun >= 0.0:
            continue
        w_min = float(opt.x)
        roots.append(brentq(sprime_minus_one, lo, w_min, xtol=1e-14, rtol=8.9e-16))
        roots.append(brentq(sprime_minus_one, w_min, hi, xtol=1e-14, rtol=8.9e-16))
    edges = sorted(z_of_w(w) for w in roots)
    if len(edges) % 2 != 0:
        raise ContinuationError(f"odd number of support edges found: {edges}")
    return [(edges[i], edges[i + 1]) for i in range(0, len(edges), 2)]


# ---------------------------------------------------------------------------
# Self-consistent density of states on the real axis
# ---------------------------------------------------------------------------


def _eta_schedule(eta0: float, eta_min: float) -> np.ndarray:
    etas = [eta0]
    while etas[-1] * 0.5 >= eta_min * (1.0 - 1e-12):
        etas.append(etas[-1] * 0.5)
    if len(etas) < 2:
        raise InputError("eta schedule needs at least two levels")
    return np.asarray(etas)


_PRESETS = {
    # nodes per support component, smallest eta of the continuation
    "accurate": (801, 1e-6),
    "fast": (257, 1e-4),
    # per-trial rescaling in Monte Carlo loops: density error ~1e-5 suffices
    "histogram": (129, 1e-3),
}


@dataclass
class ScDos:
    """Self-consistent density of states with its cumulative integral.

    ``grid``/``rho``/``cdf`` concatenate the per-component cosine-graded
    nodes; evaluation between nodes uses monotone cubic interpolation.
    """

    grid: np.ndarray
    rho: np.ndarray
    cdf: np.ndarray
    components: list[tuple[float, float]]
    mass: float
    _rho_interp: list[PchipInterpolator] = field(repr=False, default_factory=list)
    _cdf_interp: list[PchipInterpolator] = field(repr=False, default_factory=list)
    _component_mass: np.ndarray = field(repr=False, default=None)

    @property
    def support(self) -> tuple[float, float]:
        return self.components[0][0], self.components[-1][1]

    def density(self, e) -> np.ndarray | float:
        e = np.asarray(e, dtype=np.float64)
        out = np.zeros(e.shape if e.ndim else (1,))
        ee = np.atleast_1d(e)
        for (lo, hi), interp in zip(self.components, self._rho_interp):
            mask = (ee >= lo) & (ee <= hi)
            if mask.any():
                out[mask] = np.clip(interp(ee[mask]), 0.0, None)
        return float(out[0]) if e.ndim == 0 else out

    def cdf_at(self, e) -> np.ndarray | float:
        e = np.asarray(e, dtype=np.float64)
        ee = np.atleast_1d(e)
        out = np.zeros(ee.shape)
        prior = 0.0
        for k, ((lo, hi), interp) in enumerate(zip(self.components, self._cdf_interp)):
            out[ee >= hi] = prior + self._component_mass[k]
            mask = (ee >= lo) & (ee < hi)
            if mask.any():
                out[mask] = prior + np.clip(interp(ee[mask]), 0.0, self._component_mass[k])
            prior += self._component_mass[k]
        return float(out[0]) if e.ndim == 0 else out

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("E,rho,cdf\n")
            for e, r, c in zip(self.grid, self.rho, self.cdf):
                fh.write(f"{e:.12g},{r:.12g},{c:.12g}\n")


def _continue_once(
    d: np.ndarray, energies: np.ndarray, etas: np.ndarray, edge_density: float
) -> np.ndarray:
    m = _initial_guess(d, energies + 1j * etas[0])
    im_second_last = None
    for k, eta in enumerate(etas):
        m, _ = _solve_fixed_point(d, energies + 1j * eta, m)
        if k == len(etas) - 2:
            im_second_last = m.imag.copy()
    last_im = m.imag
    extrap = 2.0 * last_im - im_second_last
    rho_lin = np.clip(extrap, 0.0, None) / np.pi
    rho_raw = np.clip(last_im, 0.0, None) / np.pi
    return np.where(rho_lin >= edge_density, rho_lin, rho_raw)


def _continue_to_axis(
    d: np.ndarray,
    energies: np.ndarray,
    eta0: float,
    eta_min: float,
    edge_density: float = 1e-3,
) -> np.ndarray:
    """Im m on the real axis by warm-started eta halving plus extrapolation.

    In the bulk (rho >= edge_density) a 2-point Richardson step removes the
    O(eta) error; near edges the extrapolation order drops to the plain value
    at the smallest eta, which avoids square-root overshoot.  If a level
    fails to converge, the schedule is refined (ratio 1/sqrt(2)) once before
    giving up.
    """
    try:
        return _continue_once(d, energies, _eta_schedule(eta0, eta_min), edge_density)
    except ConvergenceError as exc:
        ratio = 1.0 / np.sqrt(2.0)
        etas = [eta0]
        while etas[-1] * ratio >= eta_min * (1.0 - 1e-12):
            etas.append(etas[-1] * ratio)
        try:
            return _continue_once(d, energies, np.asarray(etas), edge_density)
        except ConvergenceError:
            raise ContinuationError(
                f"real-axis continuation failed even on the refined schedule "
                f"(last residual {exc.residual:.2e})"
            ) from exc


def scdos(
    dspec: DeformationSpectrum,
    grid: np.ndarray | None = None,
    resolution: str = "accurate",
    eta0: float = 1e-2,
) -> ScDos:
    """Density of states of the free convolution of D's spectrum with the semicircle.

    With ``grid=None`` the support components are located exactly and sampled
    on cosine-graded nodes, which makes the square-root edges smooth in the
    grading variable and keeps the total mass accurate to ~1e-9.
    """
    if resolution not in _PRESETS:
        raise InputError(f"unknown resolution {resolution!r}; use one of {sorted(_PRESETS)}")
    nodes, eta_min = _PRESETS[resolution]
    components = support_edges(dspec)
    if grid is not None:
        grid = np.asarray(grid, dtype=np.float64)
        lo, hi = components[0][0], components[-1][1]
        if grid.min() > lo or grid.max() < hi:
            raise InputError(
                f"grid [{grid.min():.4g}, {grid.max():.4g}] does not cover the "
                f"support [{lo:.4g}, {hi:.4g}] with margin"
            )

    theta = np.linspace(0.0, np.pi, nodes)
    all_e, all_rho, all_cdf = [], [], []
    rho_interp, cdf_interp, comp_mass = [], [], []
    prior = 0.0
    for lo, hi in components:
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        e_nodes = mid - half * np.cos(theta)
        e_nodes[0], e_nodes[-1] = lo, hi
        rho_nodes = _continue_to_axis(dspec.d, e_nodes, eta0, eta_min)
        rho_nodes[0] = rho_nodes[-1] = 0.0
        # integrate in the grading variable, where sqrt edges are smooth
        integrand = rho_nodes * half * np.sin(theta)
        cdf_nodes = cumulative_simpson(integrand, x=theta, initial=0.0)
        cdf_nodes = np.maximum.accumulate(np.clip(cdf_nodes, 0.0, None))
        mass = float(cdf_nodes[-1])
        all_e.append(e_nodes)
        all_rho.append(rho_nodes)
        all_cdf.append(prior + cdf_nodes)
        rho_interp.append(PchipInterpolator(e_nodes, rho_nodes, extrapolate=False))
        cdf_interp.append(PchipInterpolator(e_nodes, cdf_nodes, extrapolate=False))
        comp_mass.append(mass)
        prior += mass

    dos = ScDos(
        grid=np.concatenate(all_e),
        rho=np.concatenate(all_rho),
        cdf=np.concatenate(all_cdf),
        components=components,
        mass=prior,
        _rho_interp=rho_interp,
        _cdf_interp=cdf_interp,
        _component_mass=np.asarray(comp_mass),
    )
    if grid is not None:
        rho_user = dos.density(grid)
        cdf_user = dos.cdf_at(grid)
        return ScDos(
            grid=grid,
            rho=rho_user,
            cdf=cdf_user,
            components=dos.components,
            mass=dos.mass,
            _rho_interp=dos._rho_interp,
            _cdf_interp=dos._cdf_interp,
            _component_mass=dos._component_mass,
        )
    return dos


# ---------------------------------------------------------------------------
# Quantiles and the index map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuantileTable:
    """Quantiles gamma_i (1-based i in [N]) with bulk flags rho(gamma_i) >= c1."""

    gamma: np.ndarray
    bulk: np.ndarray
    n: int
    bulk_threshold: float

    def gamma_at(self, i: int) -> float:
        if not 1 <= i <= self.n:
            raise InputError(f"quantile index {i} outside [1, {self.n}]")
        return float(self.gamma[i - 1])

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("i,gamma,bulk_flag\n")
            for i in range(self.n):
                fh.write(f"{i + 1},{self.gamma[i]:.12g},{int(self.bulk[i])}\n")


def quantile(dos: ScDos, frac: float) -> float:
    """gamma with cdf(gamma) = frac * total mass, by monotone bisection."""
    if not 0.0 <= frac <= 1.0:
        raise InputError(f"quantile fraction {frac} outside [0, 1]")
    target = frac * dos.mass
    lo, hi = dos.support
    if frac == 0.0:
        return lo
    if frac == 1.0:
        return hi
    return float(brentq(lambda e: dos.cdf_at(e) - target, lo, hi, xtol=1e-14, rtol=8.9e-16))


def quantiles(dos: ScDos, n: int, bulk_threshold: float = 0.05) -> QuantileTable:
    """All N quantiles of the density, with bulk flags."""
    if n < 1:
        raise InputError("quantile table needs n >= 1")
    gam = np.empty(n)
    for i in range(1, n + 1):
        gam[i - 1] = quantile(dos, i / n)
    bulk = dos.density(gam) >= bulk_threshold
    return QuantileTable(gamma=gam, bulk=bulk, n=n, bulk_threshold=bulk_threshold)


def index_at_energy(dos: ScDos, e: float, n: int) -> int:
    """i0 = ceil(N * cdf(E)), clamped to [1, N] (1-based)."""
    frac = float(dos.cdf_at(e)) / dos.mass
    return int(min(max(np.ceil(n * frac), 1), n))


@dataclass(frozen=True)
class QuantileShiftReport:
    """Measured quantile shift vs the linear prediction (x1 - x2) <A>."""

    i: int
    x1: float
    x2: float
    gamma1: float
    gamma2: float
    measured: float
    predicted: float
    residual: float
    bound_scale: float


def quantile_shift_check(
    deform: DeformationSpec,
    x1: float,
    x2: float,
    i: int,
    n: int,
    resolution: str = "accurate",
    bulk_threshold: float = 0.05,
) -> QuantileShiftReport:
    """Check gamma_i^{x1} - gamma_i^{x2} ~= (x1 - x2) <A> for a bulk index.

    The expected residual is O(|dx| <Å²>^{1/2} + dx²), reported as
    ``bound_scale``.  Raises if the index leaves the bulk for either x.
    """
    gammas = {}
    for x in (x1, x2):
        dspec = DeformationSpectrum.from_deformation(deform, x)
        dos = scdos(dspec, resolution=resolution)
        g = quantile(dos, i / n)
        if dos.density(g) < bulk_threshold:
            raise InputError(
                f"index {i} leaves the bulk at x = {x:.4g} "
                f"(density {dos.density(g):.3g} < {bulk_threshold})"
            )
        gammas[x] = g
    measured = gammas[x1] - gammas[x2]
    predicted = (x1 - x2) * deform.trace_a
    dx = abs(x1 - x2)
    return QuantileShiftReport(
        i=i,
        x1=x1,
        x2=x2,
        gamma1=gammas[x1],
        gamma2=gammas[x2],
        measured=measured,
        predicted=predicted,
        residual=measured - predicted,
        bound_scale=dx * np.sqrt(deform.ring_second_moment) + dx**2,
    )


# ---------------------------------------------------------------------------
# Two-resolvent deterministic observables
# ---------------------------------------------------------------------------


def _shared_basis(sol1: MdeSolution, sol2: MdeSolution) -> bool:
    b1, b2 = sol1.dspec.basis, sol2.dspec.basis
    if b1 is None or b2 is None:
        return True  # caller contract: solutions built consistently
    if b1 is b2:
        return True
    return b1.shape == b2.shape and np.array_equal(b1, b2)


def _m1m2_mean(sol1: MdeSolution, sol2: MdeSolution, adjoint: bool) -> complex:
    m2 = np.conj(sol2.m_diag) if adjoint else sol2.m_diag
    if _shared_basis(sol1, sol2):
        if sol1.dspec.n != sol2.dspec.n:
            raise InputError("solutions have different dimensions")
        return complex(np.mean(sol1.m_diag * m2))
    # General path: D1, D2 do not commute; rotate through both eigenbases.
    v1, v2 = sol1.dspec.basis, sol2.dspec.basis
    w = np.abs(v1.conj().T @ v2) ** 2
    return complex(sol1.m_diag @ w @ m2 / sol1.dspec.n)


def stability_factor(sol1: MdeSolution, sol2: MdeSolution, adjoint: bool = False) -> float:
    """|1 - <M1 M2>| (or |1 - <M1 M2*>| with adjoint=True)."""
    return float(abs(1.0 - _m1m2_mean(sol1, sol2, adjoint)))


def m12_observable(
    sol1: MdeSolution,
    sol2: MdeSolution,
    obs: np.ndarray | HermitianMatrix | None = None,
    min_stability: float = 1e-8,
) -> complex:
    """<M12 obs> with M12 = M1 M2 / (1 - <M1 M2>).

    ``obs`` may be None (identity), a 1-d array interpreted as the diagonal of
    the observable in D's (shared) eigenbasis, or a full Hermitian matrix in
    the original basis (requires the spectra to carry their bases).
    """
    denom = 1.0 - _m1m2_mean(sol1, sol2, adjoint=False)
    if abs(denom) <= min_stability:
        raise StabilitySingularError(
            f"stability factor {abs(denom):.3g} below threshold {min_stability:.3g}"
        )
    if obs is None:
        return complex(_m1m2_mean(sol1, sol2, adjoint=False) / denom)
    if isinstance(obs, HermitianMatrix):
        obs = obs.array
    obs = np.asarray(obs)
    if obs.ndim == 1:
        if not _shared_basis(sol1, sol2):
            raise InputError("diagonal observable requires a shared eigenbasis")
        num = np.mean(sol1.m_diag * sol2.m_diag * obs)
        return complex(num / denom)
    v1 = sol1.dspec.basis
    v2 = sol2.dspec.basis
    if v1 is None or v2 is None:
        raise InputError("matrix observable requires deformation bases")
    # <M1 M2 Obs> = (1/N) sum_kl m1_k m2_l (V1* V2)_kl (V2* Obs V1)_lk
    cross = v1.conj().T @ v2
    back = v2.conj().T @ (obs @ v1)
    num = np.einsum("k,l,kl,lk->", sol1.m_diag, sol2.m_diag, cross, back) / sol1.dspec.n
    return complex(num / denom)
