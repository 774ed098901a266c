"""DBM flows: Brownian conventions, OU relaxation, eigenvalue SDE, covariation."""

import numpy as np
import pytest
from concurrent.futures import ThreadPoolExecutor

from rmtq import dbm
from rmtq._kernels import fallback
from rmtq.ensembles import HermitianMatrix, SymmetryClass, goe, gue
from rmtq.errors import InputError
from rmtq.rng import derive_substream
from rmtq.spectral import eigh

try:
    from rmtq._kernels import _core  # noqa: F401

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


@pytest.mark.parametrize("sym", list(SymmetryClass))
def test_brownian_increment_variances(sym):
    n, dt, draws = 24, 0.37, 400
    rng = derive_substream(60, "binc", sym.name)
    off, diag = [], []
    for _ in range(draws):
        b = dbm.brownian_increment(n, sym, dt, rng).array
        off.append(b[np.tril_indices(n, -1)])
        diag.append(np.real(np.diag(b)))
    off = np.concatenate(off)
    diag = np.concatenate(diag)
    assert np.mean(np.abs(off) ** 2) == pytest.approx(dt, rel=0.05)
    expected_diag = 2.0 * dt / sym.beta
    assert np.var(diag) == pytest.approx(expected_diag, rel=0.05)
    if sym is SymmetryClass.COMPLEX_HERMITIAN:
        assert abs(np.mean(off**2)) <= 0.01 * dt


def test_matrix_step_hermitian_and_martingale():
    n, paths, dt = 8, 4000, 0.2
    rng = derive_substream(61, "mart")
    h0 = goe(n, rng)
    acc = np.zeros((n, n))
    for _ in range(paths):
        h1 = dbm.matrix_dbm_step(h0, dt, rng)
        assert np.array_equal(h1.array, h1.array.T)
        acc += h1.array - h0.array
    # per-entry increment std is sqrt(dt/n); the path-mean shrinks by sqrt(paths)
    bound = 5 * np.sqrt(2 * dt / n) / np.sqrt(paths)
    assert np.max(np.abs(acc / paths)) <= bound


def test_offdiagonal_variance_growth_over_steps():
    n, k, dt, paths = 4, 5, 0.1, 10000
    rng = derive_substream(62, "grow")
    h0 = goe(n, rng)
    incs = []
    for _ in range(paths):
        h = h0
        for _ in range(k):
            h = dbm.matrix_dbm_step(h, dt, rng)
        incs.append(h.array[1, 0] - h0.array[1, 0])
    assert np.var(incs) == pytest.approx(k * dt / n, rel=0.05)


@pytest.mark.parametrize("sym", list(SymmetryClass))
def test_trace_is_brownian(sym):
    # Var(Tr H_t - Tr H_0) = (2/beta) t
    n, dt, steps, paths = 6, 0.05, 4, 4000
    t = dt * steps
    rng = derive_substream(63, "trace", sym.name)
    h0 = gue(n, rng) if sym is SymmetryClass.COMPLEX_HERMITIAN else goe(n, rng)
    deltas = []
    for _ in range(paths):
        h = h0
        for _ in range(steps):
            h = dbm.matrix_dbm_step(h, dt, rng)
        deltas.append(h.trace() - h0.trace())
    assert np.var(deltas) == pytest.approx(2.0 * t / sym.beta, rel=0.08)


def test_ou_fixed_point_without_noise():
    rng = derive_substream(64, "oufix")
    h = goe(12, rng)
    out = dbm.ou_step(h, h, 0.3, rng, noise=False)
    np.testing.assert_allclose(out.array, h.array, atol=0.0)


def test_ou_expectation_preserved():
    n, paths, dt, steps = 6, 2000, 0.1, 5
    rng = derive_substream(64, "oumean")
    mean = goe(n, rng)
    acc = np.zeros((n, n))
    for _ in range(paths):
        h = mean
        for _ in range(steps):
            h = dbm.ou_step(h, mean, dt, rng)
        acc += h.array
    dev = np.max(np.abs(acc / paths - mean.array))
    assert dev <= 5 * np.sqrt(steps * dt / n / paths) * 2


def test_ou_stationary_offdiagonal_variance():
    # long-run variance of an off-diagonal entry is 1/N; dt small enough that
    # the Euler-Maruyama stationary bias (~ dt/4 relative) stays below 1.5%
    n, dt, steps = 40, 0.05, 20000
    rng = derive_substream(64, "oustat")
    zero = HermitianMatrix(np.zeros((n, n)), SymmetryClass.REAL_SYMMETRIC)
    h = zero
    burn = int(20 / dt)  # ~10 relaxation times at rate 1/2
    pool = []
    for k in range(steps):
        h = dbm.ou_step(h, zero, dt, rng)
        if k >= burn and k % 40 == 0:
            pool.append(h.array[np.tril_indices(n, -1)])
    var = np.var(np.concatenate(pool))
    assert var == pytest.approx(1.0 / n, rel=0.05)


def test_eigenvalue_sde_two_particle_repulsion():
    # no-noise drift: d(lam2 - lam1) = (2/N) dt / (lam2 - lam1) > 0
    lams = np.array([-0.3, 0.4])
    drift = np.asarray(fallback.dbm_drift(lams))
    np.testing.assert_allclose(drift, [1.0 / -0.7, 1.0 / 0.7])
    assert drift[1] - drift[0] > 0


def test_eigenvalue_sde_center_of_mass_drift_free():
    rng = derive_substream(65, "com")
    lams = np.sort(rng.standard_normal(33))
    drift = np.asarray(fallback.dbm_drift(lams))
    assert abs(drift.sum()) <= 1e-10 * np.max(np.abs(drift))


def test_eigenvalue_sde_ordering_and_determinism():
    rng1 = derive_substream(66, "sde")
    lam0 = eigh(goe(64, rng1)).eigenvalues
    out1 = dbm.eigenvalue_dbm_step(lam0, 0.01, derive_substream(67, "n"), beta=1)
    out2 = dbm.eigenvalue_dbm_step(lam0, 0.01, derive_substream(67, "n"), beta=1)
    assert np.all(np.diff(out1) > 0)
    assert np.array_equal(out1, out2)
    with pytest.raises(InputError):
        dbm.eigenvalue_dbm_step(np.array([1.0, 0.5]), 0.01, rng1, beta=1)
    with pytest.raises(InputError):
        dbm.eigenvalue_dbm_step(lam0, -1.0, rng1, beta=1)


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel not built")
def test_kernel_backends_agree():
    from rmtq._kernels import _core

    rng = derive_substream(68, "eq")
    lam0 = eigh(goe(48, rng)).eigenvalues
    normals = rng.standard_normal((64, 48))
    a = lam0.copy()
    b = lam0.copy()
    adv_a = _core.dbm_advance(a, 5e-4, 1.0, 48, normals, 0.1, 20)
    adv_b = fallback.dbm_advance(b, 5e-4, 1.0, 48, normals, 0.1, 20)
    assert adv_a[1] == adv_b[1]  # identical noise-row consumption
    assert adv_a[2] == adv_b[2]
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


def test_weyl_step_bound():
    rng = derive_substream(69, "weyl")
    h = gue(100, rng)
    lam0 = eigh(h).eigenvalues
    db = dbm.brownian_increment(100, h.sym, 0.01, rng)
    h1 = h.add(db, scale=1.0 / 10.0)
    lam1 = eigh(h1).eigenvalues
    move = np.max(np.abs(lam1 - lam0))
    norm_db = np.max(np.abs(np.linalg.eigvalsh(db.array)))
    assert move <= norm_db / 10.0 + 1e-12


def test_covariation_same_parameters():
    rng = derive_substream(70, "cov1")
    h0 = goe(40, rng)
    a = goe(40, derive_substream(70, "cov1A"))
    res = dbm.measure_quadratic_covariation(h0, a, 0.2, 0.2, 20, 20, 2e-4, 300, rng)
    assert abs(res.covariation - 1.0) <= 3 * res.stderr
    assert res.overlap_mean == pytest.approx(1.0, abs=1e-10)


def test_covariation_distinct_indices():
    rng = derive_substream(71, "cov0")
    h0 = goe(40, rng)
    a = goe(40, derive_substream(71, "cov0A"))
    res = dbm.measure_quadratic_covariation(h0, a, 0.2, 0.2, 20, 28, 2e-4, 300, rng)
    assert abs(res.covariation) <= 3 * res.stderr
    assert res.overlap_mean <= 1e-10


def test_coupled_paths_track_matrix_flow():
    # SDE driven by the matrix path's projected noises stays within 1/N in the bulk
    n = 100
    t_total = n ** -0.8

    def deviation(seed):
        rng = derive_substream(72, "coupled", seed)
        h0 = goe(n, rng)
        lam_mat, lam_sde = dbm.coupled_paths(h0, t_total, 500, rng)
        bulk = slice(n // 10, 9 * n // 10)
        return float(np.max(np.abs(lam_mat[bulk] - lam_sde[bulk])))

    with ThreadPoolExecutor(2) as ex:
        devs = list(ex.map(deviation, range(20)))
    passed = sum(d <= 1.0 / n for d in devs)
    assert passed >= 19, f"coupled deviation quantiles: {np.sort(devs)}"


def test_path_csv_dump(tmp_path):
    times = np.array([0.0, 0.1])
    eigs = np.array([[0.0, 1.0], [0.1, 1.1]])
    with pytest.raises(InputError):
        dbm.DbmPath(np.array([0.1, 0.1]), eigs)
    path = dbm.DbmPath(times, eigs)
    out = tmp_path / "path.csv"
    path.to_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "t,i,lambda"
    assert len(lines) == 5
