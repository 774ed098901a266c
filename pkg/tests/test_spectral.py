"""Eigendecomposition, gaps, overlaps, and resolvent-product observables."""

import numpy as np
import pytest
from concurrent.futures import ThreadPoolExecutor
from scipy.optimize import brentq

from rmtq import mde, spectral
from rmtq.ensembles import HermitianMatrix, SymmetryClass, goe, gue
from rmtq.errors import InputError, RejectedSampleError
from rmtq.rng import derive_substream


def test_eigh_two_by_two():
    h = HermitianMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), SymmetryClass.REAL_SYMMETRIC)
    sd = spectral.eigh(h)
    np.testing.assert_allclose(sd.eigenvalues, [-1.0, 1.0], atol=1e-14)


def test_eigh_zero_matrix_degenerate():
    h = HermitianMatrix(np.zeros((3, 3)), SymmetryClass.REAL_SYMMETRIC)
    sd = spectral.eigh(h, want_vectors=True)
    np.testing.assert_allclose(sd.eigenvalues, 0.0, atol=0.0)
    gram = sd.eigenvectors.T @ sd.eigenvectors
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-14)


def test_eigh_rejects_non_finite():
    arr = np.array([[np.nan, 0.0], [0.0, 1.0]])
    h = HermitianMatrix.from_lower(arr, SymmetryClass.REAL_SYMMETRIC)
    with pytest.raises(InputError):
        spectral.eigh(h)


def test_gue_spectrum_inside_support_margin():
    # semicircle support [-2, 2] plus edge fluctuation; all of 20 seeds inside
    def extreme(seed):
        lam = spectral.eigh(gue(1000, derive_substream(seed, "supp"))).eigenvalues
        return max(-lam[0], lam[-1])

    with ThreadPoolExecutor(2) as ex:
        extremes = list(ex.map(extreme, range(20)))
    assert max(extremes) <= 2.05


def test_eigh_invariants():
    h = gue(300, derive_substream(11, "inv"))
    sd = spectral.eigh(h, want_vectors=True)
    u, lam = sd.eigenvectors, sd.eigenvalues
    norm = float(np.max(np.abs(lam)))
    assert np.max(np.abs(h.array @ u - u * lam[None, :])) <= 1e-8 * norm
    assert np.max(np.abs(u.conj().T @ u - np.eye(300))) <= 1e-10
    assert abs(np.sum(lam) - h.trace()) <= 1e-8 * 300 * norm


def test_phase_convention_reproducible():
    h = gue(40, derive_substream(12, "phase"))
    sd1 = spectral.eigh(h, want_vectors=True)
    sd2 = spectral.eigh(h, want_vectors=True)
    assert np.array_equal(sd1.eigenvectors, sd2.eigenvectors)
    lead = sd1.eigenvectors[np.argmax(np.abs(sd1.eigenvectors), axis=0), np.arange(40)]
    assert np.all(np.abs(lead.imag) <= 1e-12)
    assert np.all(lead.real > 0)


def test_gaps_basic():
    sd = spectral.SpectralData(np.array([0.0, 1.0, 3.0]))
    np.testing.assert_allclose(spectral.gaps(sd), [1.0, 2.0])
    const = spectral.SpectralData(np.zeros(5))
    np.testing.assert_allclose(spectral.gaps(const), 0.0)
    with pytest.raises(InputError):
        spectral.gaps(spectral.SpectralData(np.array([1.0])))


def test_middle_gap_unit_mean():
    # rescaled middle gap has mean 1 under the spacing normalization
    n, seeds = 100, 5000

    def one(seed):
        lam = spectral.eigh(gue(n, derive_substream(seed, "mean"))).eigenvalues
        i = n // 2
        return n * mde.semicircle_rho(lam[i - 1]) * (lam[i] - lam[i - 1])

    with ThreadPoolExecutor(2) as ex:
        vals = np.fromiter(ex.map(one, range(seeds)), dtype=float)
    assert np.mean(vals) == pytest.approx(1.0, abs=0.05)


def test_rescaled_gap_arithmetic():
    n = 10
    lam = np.zeros(n)
    lam[5] = np.pi / n
    lam[6:] = np.arange(1, 5)
    sd = spectral.SpectralData(np.sort(lam))
    out = spectral.rescaled_gap(sd, 5, lambda e: 1.0 / np.pi)
    assert out.s == pytest.approx(1.0, rel=1e-12)


def test_rescaled_gap_degenerate_zero():
    sd = spectral.SpectralData(np.array([0.0, 0.0, 1.0]))
    assert spectral.rescaled_gap(sd, 1, lambda e: 1.0).s == 0.0


def test_rescaled_gap_rejects_zero_density():
    sd = spectral.SpectralData(np.array([0.0, 1.0]))
    with pytest.raises(RejectedSampleError):
        spectral.rescaled_gap(sd, 1, lambda e: 0.0)
    with pytest.raises(InputError):
        spectral.rescaled_gap(sd, 2, lambda e: 1.0)


def test_quantile_substitution_negligible_in_bulk():
    # replacing rho(lambda_i) by rho(gamma_i) moves s by <= 0.01 in the bulk
    n = 1000
    lam = spectral.eigh(gue(n, derive_substream(13, "subst"))).eigenvalues
    gam = np.array(
        [brentq(lambda x, f=i / n: mde.semicircle_cdf(x) - f, -2.0, 2.0) for i in range(1, n)]
    )
    bulk = np.arange(n // 10, 9 * n // 10)
    gaps = np.diff(lam)
    s_lam = n * mde.semicircle_rho(lam[bulk]) * gaps[bulk]
    s_gam = n * mde.semicircle_rho(gam[bulk]) * gaps[bulk]
    assert np.max(np.abs(s_lam - s_gam)) <= 0.01


def test_overlaps_identity_and_completeness():
    h = gue(64, derive_substream(14, "ov"))
    sd = spectral.eigh(h, want_vectors=True)
    ov = spectral.overlaps(sd, sd)
    np.testing.assert_allclose(ov.values, np.eye(64), atol=1e-12)
    h2 = gue(64, derive_substream(14, "ov2"))
    sd2 = spectral.eigh(h2, want_vectors=True)
    cross = spectral.overlaps(sd, sd2)
    np.testing.assert_allclose(cross.row_sums(), 1.0, atol=1e-10)
    np.testing.assert_allclose(cross.col_sums(), 1.0, atol=1e-10)


def test_overlaps_phase_invariant():
    h1 = gue(24, derive_substream(15, "ph1"))
    h2 = gue(24, derive_substream(15, "ph2"))
    sd1 = spectral.eigh(h1, want_vectors=True)
    sd2 = spectral.eigh(h2, want_vectors=True)
    phases = np.exp(1j * np.linspace(0.1, 2.0, 24))
    twisted = spectral.SpectralData(sd1.eigenvalues, sd1.eigenvectors * phases[None, :])
    a = spectral.overlaps(sd1, sd2).values
    b = spectral.overlaps(twisted, sd2).values
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_overlaps_requires_vectors():
    sd = spectral.eigh(gue(8, derive_substream(16, "nov")))
    with pytest.raises(InputError):
        spectral.overlaps(sd, sd)


def test_ward_identity():
    h = gue(200, derive_substream(17, "ward"))
    sd = spectral.eigh(h, want_vectors=True)
    z = 0.4 + 0.07j
    lhs = spectral.resolvent_trace_product(sd, sd, z, np.conj(z))
    rhs = spectral.im_trace(sd, z) / z.imag
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_resolvent_derivative_identity():
    # <G^2> = d<G>/dz via central finite difference
    h = goe(150, derive_substream(18, "deriv"))
    sd = spectral.eigh(h, want_vectors=True)
    z = 0.2 + 0.5j
    g2 = spectral.resolvent_trace_product(sd, sd, z, z)
    eps = 1e-6

    def g_tr(zz):
        return np.mean(1.0 / (sd.eigenvalues - zz))

    fd = (g_tr(z + eps) - g_tr(z - eps)) / (2 * eps)
    assert abs(g2 - fd) <= 1e-6 * abs(fd)


def test_resolvent_rejects_real_axis():
    h = gue(8, derive_substream(19, "axis"))
    with pytest.raises(InputError):
        spectral.resolvent_trace_product(h, h, 1.0, 1.0 + 1j)


def test_resolvent_with_observable_matches_identity_path():
    h1 = gue(60, derive_substream(20, "obs1"))
    h2 = gue(60, derive_substream(20, "obs2"))
    eye = HermitianMatrix(np.eye(60, dtype=complex), SymmetryClass.COMPLEX_HERMITIAN)
    z1, z2 = 0.1 + 0.3j, -0.2 + 0.4j
    a = spectral.resolvent_trace_product(h1, h2, z1, z2)
    b = spectral.resolvent_trace_product(h1, h2, z1, z2, obs=eye)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))
