"""Exact reference gap distributions and CDF/KS utilities.

The Gaudin-Mehta nearest-gap densities p_1, p_2 are evaluated from the sigma
form of a Painlevé V transcendent,

    (t s'')^2 + 4 (t s' - s)(t s' - s + (s')^2) = 0,
    s(t) ~ -t/pi - t^2/pi^2   (t -> 0),

via

    p_2(s) = d^2/ds^2 exp( I_2(s) ),   I_2(s) = int_0^{pi s} s(t)/t dt,
    p_1(s) = d^2/ds^2 exp( I_1(s) ),
    I_1(s) = (1/2) int_0^{pi s} [ s(t)/t - sqrt(-d/dt (s(t)/t)) ] dt.

Both second derivatives are taken analytically from (sigma, sigma'); an
independent Nyström/Gauss-Legendre evaluation of the sine-kernel Fredholm
determinant cross-checks p_2.  Closed-form Wigner surmises and KS-distance
helpers round out the reference layer.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.special import erf

from rmtq.errors import BranchLossError, InputError

__all__ = [
    "SigmaSolution",
    "GapReference",
    "EmpiricalCdf",
    "solve_sigma",
    "p2_from_sigma",
    "p1_from_sigma",
    "fredholm_e",
    "fredholm_p2_oracle",
    "wigner_surmise",
    "gaudin_mehta",
    "cached_reference",
    "ks_distance",
]

_PI = np.pi
DEFAULT_S_MAX = 5.0
DEFAULT_T0 = 1e-4


# ---------------------------------------------------------------------------
# Sigma ODE
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaSolution:
    """Dense solution of the sigma ODE with its two running integrals.

    State along the integration is (sigma, sigma', J, W) where J' = sigma/t
    and W' = sigma/t - sqrt(-(sigma/t)').  ``min_radicand``/``min_p`` are
    branch diagnostics: the most negative values of the square-root arguments
    encountered while integrating.
    """

    t0: float
    t_max: float
    grid: np.ndarray
    sigma: np.ndarray
    sigma_prime: np.ndarray
    min_radicand: float
    min_p: float
    _dense: object = field(repr=False, default=None)

    def evaluate(self, t: np.ndarray) -> tuple[np.ndarray, ...]:
        """(sigma, sigma', J, W) at arbitrary t in [0, t_max].

        Below the series start the ODE-consistent expansion
        sigma = -t/pi - t^2/pi^2 - t^3/pi^3 + O(t^4) is used (the cubic
        coefficient is forced by the equation itself).
        """
        t = np.asarray(t, dtype=np.float64)
        if np.any(t < 0) or np.any(t > self.t_max * (1 + 1e-12)):
            raise InputError(f"t outside [0, {self.t_max}]")
        out = np.zeros((4,) + t.shape)
        small = t < self.t0
        if small.any():
            ts = t[small]
            out[0][small] = -ts / _PI - ts**2 / _PI**2 - ts**3 / _PI**3
            out[1][small] = -1.0 / _PI - 2.0 * ts / _PI**2 - 3.0 * ts**2 / _PI**3
            out[2][small] = -ts / _PI - ts**2 / (2 * _PI**2) - ts**3 / (3 * _PI**3)
            out[3][small] = -2.0 * ts / _PI - ts**2 / _PI**2 - ts**3 / (6 * _PI**3)
        if (~small).any():
            vals = self._dense(t[~small])
            for k in range(4):
                out[k][~small] = vals[k]
        return out[0], out[1], out[2], out[3]

    def sigma_pp(self, t: np.ndarray, sigma: np.ndarray, sigma_prime: np.ndarray) -> np.ndarray:
        """sigma'' from the ODE on the tracked (negative-root) branch."""
        p = sigma - t * sigma_prime
        q = sigma_prime**2 - p
        return -2.0 * np.sqrt(np.clip(p * q, 0.0, None)) / t


def solve_sigma(
    t_max: float = 16.0,
    t0: float = DEFAULT_T0,
    rtol: float = 1e-10,
    atol: float = 1e-13,
) -> SigmaSolution:
    """Integrate the sigma ODE from series data at t0.

    The first-order system uses sigma'' = -(2/t) sqrt((sigma - t sigma')
    (t sigma' - sigma + sigma'^2)); the negative root matches the series
    value sigma''(t0) = -2/pi^2 and is kept by continuity.  A radicand below
    -1e-12 means the branch was lost and raises with the location.

    Initial data carries the 2-term asymptotics plus the cubic term
    -t^3/pi^3, whose coefficient is forced by the equation at order t^3.
    The ODE amplifies initial perturbations by ~3e7 over [t0, 5], so without
    the cubic term the t0-halving convergence check would stall near 1e-6.
    """
    if not 0 < t0 < 1e-2:
        raise InputError("series start t0 must satisfy 0 < t0 << 1")
    if t_max > 40.0:
        raise InputError("t_max above 40 is outside the validated range")
    tracker = {"min_r": np.inf, "t_r": t0, "min_p": np.inf}

    def rhs(t, y):
        sig, sigp, _, _ = y
        p = sig - t * sigp
        q = sigp * sigp - p
        r = p * q
        if r < tracker["min_r"]:
            tracker["min_r"], tracker["t_r"] = r, t
        tracker["min_p"] = min(tracker["min_p"], p)
        sigpp = -2.0 * np.sqrt(max(r, 0.0)) / t
        sqrt_p = np.sqrt(max(p, 0.0))
        return [sigp, sigpp, sig / t, (sig - sqrt_p) / t]

    y0 = [
        -t0 / _PI - t0**2 / _PI**2 - t0**3 / _PI**3,
        -1.0 / _PI - 2.0 * t0 / _PI**2 - 3.0 * t0**2 / _PI**3,
        -t0 / _PI - t0**2 / (2 * _PI**2) - t0**3 / (3 * _PI**3),
        -2.0 * t0 / _PI - t0**2 / _PI**2 - t0**3 / (6 * _PI**3),
    ]
    sol = solve_ivp(
        rhs, (t0, t_max), y0, method="DOP853", dense_output=True, rtol=rtol, atol=atol
    )
    if not sol.success:
        raise BranchLossError(f"sigma ODE integration failed: {sol.message}")
    if tracker["min_r"] < -1e-12:
        raise BranchLossError(
            f"sigma ODE radicand {tracker['min_r']:.3e} < -1e-12", t=tracker["t_r"]
        )
    return SigmaSolution(
        t0=t0,
        t_max=t_max,
        grid=sol.t,
        sigma=sol.y[0],
        sigma_prime=sol.y[1],
        min_radicand=float(tracker["min_r"]),
        min_p=float(tracker["min_p"]),
        _dense=sol.sol,
    )


# ---------------------------------------------------------------------------
# Reference tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapReference:
    """Tabulated gap density p_beta and CDF F_beta on a grid of spacings."""

    beta: int
    s: np.ndarray
    p: np.ndarray
    cdf: np.ndarray
    provenance: str

    def density_at(self, s) -> np.ndarray | float:
        return np.interp(s, self.s, self.p, left=0.0, right=0.0)

    def cdf_at(self, s) -> np.ndarray | float:
        return np.interp(s, self.s, self.cdf, left=0.0, right=1.0)

    def mass(self) -> float:
        return float(simpson(self.p, x=self.s))

    def mean_spacing(self) -> float:
        return float(simpson(self.s * self.p, x=self.s))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("s,p,cdf,provenance\n")
            for s, p, c in zip(self.s, self.p, self.cdf):
                fh.write(f"{s:.12g},{p:.12g},{c:.12g},{self.provenance}\n")


def _default_grid(s_max: float, n_points: int) -> np.ndarray:
    return np.linspace(0.0, s_max, n_points)


def _check_grid(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if s.size == 0 or np.any(s < 0) or np.any(np.diff(s) <= 0):
        raise InputError("spacing grid must be nonnegative and strictly increasing")
    return s


def p2_from_sigma(sig: SigmaSolution, s: np.ndarray | None = None) -> GapReference:
    """Complex-class density p_2 with its CDF, all analytic in (sigma, sigma').

    With I(s) = int_0^{pi s} sigma/t dt and E = exp(I):
        p_2 = E [ (pi sigma'(pi s) s - sigma(pi s))/s^2 + (sigma(pi s)/s)^2 ],
        F_2 = E sigma(pi s)/s + 1.
    """
    s = _default_grid(DEFAULT_S_MAX, 5001) if s is None else _check_grid(s)
    if s.max() * _PI > sig.t_max:
        raise InputError("sigma solution does not cover pi * s_max")
    p = np.zeros_like(s)
    cdf = np.zeros_like(s)
    pos = s > 0
    sp = s[pos]
    t = _PI * sp
    sigma, sigma_p, big_j, _ = sig.evaluate(t)
    e_of_s = np.exp(big_j)
    i_prime = sigma / sp
    i_second = (_PI * sigma_p * sp - sigma) / sp**2
    p[pos] = np.clip(e_of_s * (i_second + i_prime**2), 0.0, None)
    cdf[pos] = np.clip(e_of_s * sigma / sp + 1.0, 0.0, 1.0)
    return GapReference(beta=2, s=s, p=p, cdf=cdf, provenance="painleve")


def p1_from_sigma(sig: SigmaSolution, s: np.ndarray | None = None) -> GapReference:
    """Real-class density p_1; the square-root term is differentiated via the ODE.

    With u = sigma/t, P = sigma - t sigma' (so -u' = P/t^2 must stay >= 0) and
    K(s) = W(pi s)/2:
        K'  = (pi/2) [u - sqrt(P)/t],
        K'' = (pi^2/2) [u' - (-u')' / (2 sqrt(-u'))],   (-u')' = (-t sigma'' - 2P/t)/t^2,
        p_1 = e^K (K'' + K'^2),   F_1 = e^K K' + 1.
    """
    s = _default_grid(DEFAULT_S_MAX, 5001) if s is None else _check_grid(s)
    if s.max() * _PI > sig.t_max:
        raise InputError("sigma solution does not cover pi * s_max")
    p = np.zeros_like(s)
    cdf = np.zeros_like(s)
    pos = s > 0
    t = _PI * s[pos]
    sigma, sigma_p, _, big_w = sig.evaluate(t)
    big_p = sigma - t * sigma_p
    if np.min(big_p) < -1e-12:
        raise InputError(
            f"radicand -d/dt(sigma/t) dips to {np.min(big_p):.3e} < 0; p_1 undefined there"
        )
    big_p = np.clip(big_p, 0.0, None)
    sigma_pp = sig.sigma_pp(t, sigma, sigma_p)
    u = sigma / t
    u_prime = -big_p / t**2
    sqrt_term = np.sqrt(big_p) / t  # sqrt(-u')
    neg_up_prime = (-t * sigma_pp - 2.0 * big_p / t) / t**2  # d/dt (-u')
    k = 0.5 * big_w
    k_prime = 0.5 * _PI * (u - sqrt_term)
    with np.errstate(divide="ignore", invalid="ignore"):
        w_prime = u_prime - np.where(sqrt_term > 0, neg_up_prime / (2.0 * sqrt_term), 0.0)
    k_second = 0.5 * _PI**2 * w_prime
    e_of_s = np.exp(k)
    p[pos] = np.clip(e_of_s * (k_second + k_prime**2), 0.0, None)
    cdf[pos] = np.clip(e_of_s * k_prime + 1.0, 0.0, 1.0)
    return GapReference(beta=1, s=s, p=p, cdf=cdf, provenance="painleve")


# ---------------------------------------------------------------------------
# Sine-kernel Fredholm determinant oracle
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=8)
def _leggauss(q: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(q)


def fredholm_e(s_values: np.ndarray, q: int = 80) -> np.ndarray:
    """Gap probability E(s) = det(I - K_s), K_s the sine kernel on [0, s].

    Nyström discretization on Gauss-Legendre nodes; the determinant is
    accumulated in log space from the eigenvalues of the symmetrized kernel,
    so it cannot underflow for large s.
    """
    if q < 20:
        raise InputError("quadrature order must be >= 20")
    nodes, weights = _leggauss(q)
    flat = np.atleast_1d(np.asarray(s_values, dtype=np.float64)).ravel()
    out = np.empty(flat.shape)
    for k, s in enumerate(flat):
        if s < 0:
            raise InputError("interval length must be >= 0")
        if s == 0.0:
            out[k] = 1.0
            continue
        x = 0.5 * s * (nodes + 1.0)
        w = 0.5 * s * weights
        kernel = np.sinc(x[:, None] - x[None, :])
        sw = np.sqrt(w)
        sym = sw[:, None] * kernel * sw[None, :]
        lam = np.linalg.eigvalsh(sym)
        lam = np.clip(lam, None, 1.0 - 1e-300)
        out[k] = np.exp(np.sum(np.log1p(-lam)))
    shape = np.asarray(s_values).shape
    return out.reshape(shape) if shape else out[0]


def fredholm_p2_oracle(
    s: np.ndarray, q: int = 80, fd_step: float = 1e-3
) -> GapReference:
    """p_2 by 5-point central differences of the Fredholm E(s) (oracle only)."""
    s = np.asarray(s, dtype=np.float64)
    if s.min() < 2 * fd_step:
        raise InputError("oracle grid must start at s >= 2 * fd_step")
    offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * fd_step
    stencil = s[:, None] + offsets[None, :]
    e_vals = fredholm_e(stencil.ravel(), q=q).reshape(stencil.shape)
    p = (
        -e_vals[:, 0] + 16.0 * e_vals[:, 1] - 30.0 * e_vals[:, 2] + 16.0 * e_vals[:, 3] - e_vals[:, 4]
    ) / (12.0 * fd_step**2)
    e_prime = (8.0 * (e_vals[:, 3] - e_vals[:, 1]) - (e_vals[:, 4] - e_vals[:, 0])) / (
        12.0 * fd_step
    )
    cdf = np.clip(e_prime + 1.0, 0.0, 1.0)
    return GapReference(beta=2, s=s, p=np.clip(p, 0.0, None), cdf=cdf, provenance="fredholm")


# ---------------------------------------------------------------------------
# Wigner surmises
# ---------------------------------------------------------------------------


def wigner_surmise(beta: int, s: np.ndarray | None = None) -> GapReference:
    """Closed-form 2x2 surmise densities and CDFs.

    beta=1: (pi/2) s exp(-pi s^2/4);  beta=2: (32/pi^2) s^2 exp(-4 s^2/pi).
    """
    s = _default_grid(DEFAULT_S_MAX, 5001) if s is None else _check_grid(s)
    if beta == 1:
        p = 0.5 * _PI * s * np.exp(-0.25 * _PI * s**2)
        cdf = 1.0 - np.exp(-0.25 * _PI * s**2)
    elif beta == 2:
        p = (32.0 / _PI**2) * s**2 * np.exp(-4.0 * s**2 / _PI)
        cdf = erf(2.0 * s / np.sqrt(_PI)) - (4.0 * s / _PI) * np.exp(-4.0 * s**2 / _PI)
    else:
        raise InputError(f"beta must be 1 or 2, got {beta}")
    return GapReference(beta=beta, s=s, p=p, cdf=cdf, provenance="surmise")


def gaudin_mehta(
    beta: int,
    s_max: float = DEFAULT_S_MAX,
    n_points: int = 5001,
    t0: float = DEFAULT_T0,
    rtol: float = 1e-10,
) -> GapReference:
    """Painlevé-route Gaudin-Mehta reference on a uniform grid."""
    sig = solve_sigma(t_max=_PI * s_max + 1.0, t0=t0, rtol=rtol)
    grid = _default_grid(s_max, n_points)
    if beta == 2:
        return p2_from_sigma(sig, grid)
    if beta == 1:
        return p1_from_sigma(sig, grid)
    raise InputError(f"beta must be 1 or 2, got {beta}")


@functools.lru_cache(maxsize=4)
def cached_reference(beta: int) -> GapReference:
    """Shared Painlevé reference table (computed once per process)."""
    return gaudin_mehta(beta)


# ---------------------------------------------------------------------------
# Empirical CDFs and Kolmogorov-Smirnov distance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous empirical CDF of a finite sample."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.sort(np.asarray(self.values, dtype=np.float64))
        if vals.size == 0:
            raise InputError("empirical CDF needs at least one sample")
        if not np.all(np.isfinite(vals)):
            raise InputError("samples must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalCdf":
        return cls(np.asarray(samples))

    @property
    def n(self) -> int:
        return self.values.size

    def evaluate(self, x) -> np.ndarray | float:
        pos = np.searchsorted(self.values, x, side="right") / self.n
        return float(pos) if np.isscalar(x) else pos


def ks_distance(emp: EmpiricalCdf, ref: "GapReference | EmpiricalCdf") -> float:
    """Exact sup-distance between CDFs, evaluated over all jump points."""
    if isinstance(ref, EmpiricalCdf):
        joint = np.concatenate([emp.values, ref.values])
        return float(np.max(np.abs(emp.evaluate(joint) - ref.evaluate(joint))))
    f = np.asarray(ref.cdf_at(emp.values))
    steps = np.arange(1, emp.n + 1) / emp.n
    return float(max(np.max(steps - f), np.max(f - (steps - 1.0 / emp.n))))
