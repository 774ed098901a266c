"""The six experiment protocols behind the harness CLI.

Each experiment builds an explicit trial schedule (unique substream label per
trial), runs trials through an order-preserving map (serial or thread pool),
and emits fixed-schema rows.  Skipped observations are counted, never
silently replaced.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from rmtq import mde, spectral
from rmtq.ensembles import (
    EnsembleSpec,
    HermitianMatrix,
    SymmetryClass,
    build_monoparametric,
    sample_wigner,
    sample_x,
)
from rmtq.errors import ConfigError, RmtqError, StabilitySingularError
from rmtq.gapref import EmpiricalCdf, cached_reference, ks_distance
from rmtq.harness.config import ExperimentConfig
from rmtq.rng import derive_substream

__all__ = ["EXPERIMENTS", "COLUMNS", "make_direction"]

PMap = Callable[[Callable, Sequence], Iterable]

COLUMNS = {
    "annealed_gap": ["experiment", "N", "repetition", "trial", "gap_index", "lam", "rho", "gap", "s"],
    "quenched_bulk_sampling": [
        "experiment", "N", "repetition", "trial", "gap_index", "lam", "rho", "gap", "s",
    ],
    "monoparametric_quenched": [
        "experiment", "arm", "N", "repetition", "trial", "x", "gap_index", "rho", "gap", "s", "rescaling",
    ],
    "ks_convergence": ["experiment", "arm", "N", "repetition", "ks", "samples"],
    "overlap_decay": [
        "experiment", "N", "trial", "x1", "x2", "pairs", "max_overlap2", "mean_overlap2",
    ],
    "local_law_check": [
        "experiment", "N", "trial", "eta", "x1", "x2", "energy",
        "g1g2_re", "g1g2_im", "m12_re", "m12_im", "abs_err", "stability", "flagged",
    ],
}


def make_direction(
    recipe: str, n: int, sym: SymmetryClass, seed: int, *labels
) -> HermitianMatrix | None:
    """Build the deformation direction A from its config recipe."""
    if recipe == "none":
        return None
    if recipe == "identity":
        return HermitianMatrix(np.eye(n, dtype=sym.dtype), sym)
    if recipe == "diag_pm1":
        diag = np.ones(n)
        diag[n // 2:] = -1.0
        return HermitianMatrix(np.diag(diag).astype(sym.dtype), sym)
    if recipe == "wigner":
        rng = derive_substream(seed, *labels)
        return sample_wigner(EnsembleSpec(n=n, sym=sym), rng)
    raise ConfigError(f"unknown deformation recipe {recipe!r}")


def _check_unique(labels: list[tuple]) -> None:
    if len(set(labels)) != len(labels):
        raise RmtqError("internal error: duplicate substream paths in schedule")


def _middle_index(n: int) -> int:
    """1-based index of the lower of the two middle eigenvalues."""
    return n // 2


# ---------------------------------------------------------------------------
# annealed_gap: middle-gap statistics over many independent matrices
# ---------------------------------------------------------------------------


def _run_annealed_gap(cfg: ExperimentConfig, pmap: PMap):
    spec_by_n = {n: EnsembleSpec(n=n, sym=cfg.symmetry, entries=cfg.entries) for n in cfg.sizes}
    tasks = [
        (n, rep, t)
        for n in cfg.sizes
        for rep in range(cfg.repetitions)
        for t in range(cfg.samples)
    ]
    _check_unique([(cfg.kind, *task) for task in tasks])

    def trial(task):
        n, rep, t = task
        rng = derive_substream(cfg.seed, cfg.kind, n, rep, t)
        h = sample_wigner(spec_by_n[n], rng)
        sd = spectral.eigh(h)
        i = _middle_index(n)
        lam_i = float(sd.eigenvalues[i - 1])
        gap = float(sd.eigenvalues[i] - sd.eigenvalues[i - 1])
        rho = float(mde.semicircle_rho(lam_i))
        if rho <= 0.0:
            return None
        return (cfg.kind, n, rep, t, i, lam_i, rho, gap, n * rho * gap)

    rows, skipped = [], 0
    for out in pmap(trial, tasks):
        if out is None:
            skipped += 1
        else:
            rows.append(out)
    return rows, len(tasks), skipped, {}


# ---------------------------------------------------------------------------
# quenched_bulk_sampling: bulk gaps of a single large matrix
# ---------------------------------------------------------------------------


def _run_quenched_bulk(cfg: ExperimentConfig, pmap: PMap):
    tasks = [(n, rep) for n in cfg.sizes for rep in range(cfg.repetitions)]
    _check_unique([(cfg.kind, *task) for task in tasks])

    def trial(task):
        n, rep = task
        rng = derive_substream(cfg.seed, cfg.kind, n, rep)
        h = sample_wigner(EnsembleSpec(n=n, sym=cfg.symmetry, entries=cfg.entries), rng)
        sd = spectral.eigh(h)
        out_rows, skips = [], 0
        k_lo, k_hi = n // 10, (9 * n) // 10
        for k in range(k_lo, k_hi + 1):
            lam_k = float(sd.eigenvalues[k - 1])
            if cfg.window is not None and not (cfg.window[0] <= lam_k <= cfg.window[1]):
                continue
            gap = float(sd.eigenvalues[k] - sd.eigenvalues[k - 1])
            rho = float(mde.semicircle_rho(lam_k))
            if rho <= 0.0:
                skips += 1
                continue
            out_rows.append((cfg.kind, n, rep, k, k, lam_k, rho, gap, n * rho * gap))
        return out_rows, skips

    rows, skipped, scheduled = [], 0, 0
    for out_rows, skips in pmap(trial, tasks):
        rows.extend(out_rows)
        skipped += skips
        scheduled += len(out_rows) + skips
    return rows, scheduled, skipped, {}


# ---------------------------------------------------------------------------
# monoparametric_quenched: fixed (H, A) with scalar x draws, vs the Gaussian arm
# ---------------------------------------------------------------------------


def _mono_rescale(cfg: ExperimentConfig, x: float, a_eigs: np.ndarray, n: int):
    """Density value used for the monoparametric gap rescaling at gamma_{N/2}."""
    if cfg.rescaling == "scaled_semicircle":
        # Wigner-direction shortcut: scDos ~ semicircle of radius 2 sqrt(1+x^2)
        return 1.0 / (np.pi * np.sqrt(1.0 + x * x))
    if cfg.rescaling == "semicircle":
        return 1.0 / np.pi
    d = np.sort(x * a_eigs)
    dos = mde.scdos(mde.DeformationSpectrum(d), resolution="histogram")
    gamma = mde.quantile(dos, _middle_index(n) / n)
    return float(dos.density(gamma))


def _arm_list(cfg: ExperimentConfig) -> tuple[str, ...]:
    return ("gauss", "mono") if cfg.arms == "both" else (cfg.arms,)


def _run_monoparametric(cfg: ExperimentConfig, pmap: PMap):
    arms = _arm_list(cfg)
    fixed = {}
    if "mono" in arms:
        for n in cfg.sizes:
            for rep in range(cfg.repetitions):
                rng_h = derive_substream(cfg.seed, cfg.kind, "H", n, rep)
                h = sample_wigner(EnsembleSpec(n=n, sym=cfg.symmetry, entries=cfg.entries), rng_h)
                a_mat = make_direction(
                    cfg.deformation_a, n, cfg.symmetry, cfg.seed, cfg.kind, "A", n, rep
                )
                if a_mat is None:
                    raise ConfigError("monoparametric experiment needs a deformation direction A")
                fixed[(n, rep)] = (h, a_mat, np.linalg.eigvalsh(a_mat.array))

    tasks = [
        (arm, n, rep, t)
        for arm in arms
        for n in cfg.sizes
        for rep in range(cfg.repetitions)
        for t in range(cfg.samples)
    ]
    _check_unique([(cfg.kind, *task) for task in tasks])

    def trial(task):
        arm, n, rep, t = task
        rng = derive_substream(cfg.seed, cfg.kind, arm, n, rep, t)
        i = _middle_index(n)
        if arm == "gauss":
            h = sample_wigner(EnsembleSpec(n=n, sym=cfg.symmetry, entries=cfg.entries), rng)
            sd = spectral.eigh(h)
            gap = float(sd.eigenvalues[i] - sd.eigenvalues[i - 1])
            rho = 1.0 / np.pi  # rho_sc at the median quantile gamma_{N/2} = 0
            return (cfg.kind, arm, n, rep, t, "", i, rho, gap, n * rho * gap, "semicircle")
        h, a_mat, a_eigs = fixed[(n, rep)]
        x = sample_x(cfg.param, n, rng)
        sd = spectral.eigh(build_monoparametric(h, a_mat, x))
        gap = float(sd.eigenvalues[i] - sd.eigenvalues[i - 1])
        try:
            rho = _mono_rescale(cfg, x, a_eigs, n)
        except RmtqError:
            return None
        if rho <= 0.0:
            return None
        return (cfg.kind, arm, n, rep, t, x, i, rho, gap, n * rho * gap, cfg.rescaling)

    rows, skipped = [], 0
    for out in pmap(trial, tasks):
        if out is None:
            skipped += 1
        else:
            rows.append(out)
    return rows, len(tasks), skipped, {}


# ---------------------------------------------------------------------------
# ks_convergence: distance to F_beta vs N, with repetitions
# ---------------------------------------------------------------------------


def _run_ks_convergence(cfg: ExperimentConfig, pmap: PMap):
    reference = cached_reference(cfg.beta)
    tasks = [
        (arm, n, rep)
        for arm in _arm_list(cfg)
        for n in cfg.sizes
        for rep in range(cfg.repetitions)
    ]
    _check_unique([(cfg.kind, *task) for task in tasks])

    def trial(task):
        arm, n, rep = task
        i = _middle_index(n)
        samples = []
        skips = 0
        if arm == "gauss":
            for t in range(cfg.samples):
                rng = derive_substream(cfg.seed, cfg.kind, arm, n, rep, t)
                h = sample_wigner(EnsembleSpec(n=n, sym=cfg.symmetry, entries=cfg.entries), rng)
                sd = spectral.eigh(h)
                gap = float(sd.eigenvalues[i] - sd.eigenvalues[i - 1])
                samples.append(n * gap / np.pi)
        else:
            rng_h = derive_substream(cfg.seed, cfg.kind, arm, "H", n, rep)
            h = sample_wigner(EnsembleSpec(n=n, sym=cfg.symmetry, entries=cfg.entries), rng_h)
            a_mat = make_direction(
                cfg.deformation_a, n, cfg.symmetry, cfg.seed, cfg.kind, arm, "A", n, rep
            )
            a_eigs = np.linalg.eigvalsh(a_mat.array)
            for t in range(cfg.samples):
                rng = derive_substream(cfg.seed, cfg.kind, arm, n, rep, t)
                x = sample_x(cfg.param, n, rng)
                sd = spectral.eigh(build_monoparametric(h, a_mat, x))
                gap = float(sd.eigenvalues[i] - sd.eigenvalues[i - 1])
                try:
                    rho = _mono_rescale(cfg, x, a_eigs, n)
                except RmtqError:
                    skips += 1
                    continue
                if rho <= 0.0:
                    skips += 1
                    continue
                samples.append(n * rho * gap)
        if not samples:
            return None, skips
        ks = ks_distance(EmpiricalCdf.from_samples(samples), reference)
        return (cfg.kind, arm, n, rep, ks, len(samples)), skips

    rows, skipped = [], 0
    for out, skips in pmap(trial, tasks):
        skipped += skips
        if out is not None:
            rows.append(out)
    return rows, len(tasks) * cfg.samples, skipped, {}


# ---------------------------------------------------------------------------
# Eigenbasis rotation: bulk overlap decay in N
# ---------------------------------------------------------------------------


def _run_overlap_decay(cfg: ExperimentConfig, pmap: PMap):
    directions = {
        n: make_direction(cfg.deformation_a, n, cfg.symmetry, cfg.seed, cfg.kind, "A", n)
        for n in cfg.sizes
    }
    tasks = [(n, t) for n in cfg.sizes for t in range(cfg.samples)]
    _check_unique([(cfg.kind, *task) for task in tasks])

    def trial(task):
        n, t = task
        rng = derive_substream(cfg.seed, cfg.kind, n, t)
        h = sample_wigner(EnsembleSpec(n=n, sym=cfg.symmetry, entries=cfg.entries), rng)
        a_mat = directions[n]
        sd1 = spectral.eigh(build_monoparametric(h, a_mat, cfg.x1), want_vectors=True)
        sd2 = spectral.eigh(build_monoparametric(h, a_mat, cfg.x2), want_vectors=True)
        bulk = np.arange(n // 10, (9 * n) // 10)
        ov = spectral.overlaps(sd1, sd2, bulk, bulk).values
        width = int(np.ceil(n * abs(cfg.x2 - cfg.x1)))
        j1, j2 = np.meshgrid(bulk, bulk, indexing="ij")
        band = np.abs(j1 - j2) <= width
        vals = ov[band]
        return (cfg.kind, n, t, cfg.x1, cfg.x2, vals.size, float(vals.max()), float(vals.mean()))

    rows = list(pmap(trial, tasks))
    return rows, len(tasks), 0, {}


# ---------------------------------------------------------------------------
# Two-resolvent local-law check: <G1 G2 A> vs <M12 A>
# ---------------------------------------------------------------------------


def _run_local_law(cfg: ExperimentConfig, pmap: PMap):
    directions = {}
    for n in cfg.sizes:
        a_mat = make_direction(cfg.deformation_a, n, cfg.symmetry, cfg.seed, cfg.kind, "A", n)
        directions[n] = (a_mat, np.linalg.eigvalsh(a_mat.array))
    tasks = [(n, t) for n in cfg.sizes for t in range(cfg.samples)]
    _check_unique([(cfg.kind, *task) for task in tasks])

    def trial(task):
        n, t = task
        rng = derive_substream(cfg.seed, cfg.kind, n, t)
        a_mat, a_eigs = directions[n]
        eta = float(n ** (-cfg.eta_exponent))
        h = sample_wigner(EnsembleSpec(n=n, sym=cfg.symmetry, entries=cfg.entries), rng)
        h1 = build_monoparametric(h, a_mat, cfg.x1)
        z1 = cfg.energy + 1j * eta
        if cfg.mode == "ward":
            sd1 = spectral.eigh(h1, want_vectors=True)
            g12 = spectral.resolvent_trace_product(sd1, sd1, z1, np.conj(z1), obs=None)
            ward = spectral.im_trace(sd1, z1) / eta
            err = abs(g12 - ward)
            return (cfg.kind, n, t, eta, cfg.x1, cfg.x1, cfg.energy,
                    g12.real, g12.imag, ward, 0.0, err, float("nan"), 0)
        h2 = build_monoparametric(h, a_mat, cfg.x2)
        sd1 = spectral.eigh(h1, want_vectors=True)
        sd2 = spectral.eigh(h2, want_vectors=True)
        g12 = spectral.resolvent_trace_product(sd1, sd2, z1, z1, obs=a_mat)
        ds1 = mde.DeformationSpectrum(np.sort(cfg.x1 * a_eigs))
        ds2 = mde.DeformationSpectrum(np.sort(cfg.x2 * a_eigs))
        sol1 = mde.solve_mde(ds1, z1)
        sol2 = mde.solve_mde(ds2, z1)
        stability = mde.stability_factor(sol1, sol2)
        try:
            m12 = mde.m12_observable(sol1, sol2, obs=a_eigs)
            err = abs(g12 - m12)
            flagged = 0
        except StabilitySingularError:
            m12 = complex("nan")
            err = float("nan")
            flagged = 1
        return (cfg.kind, n, t, eta, cfg.x1, cfg.x2, cfg.energy,
                g12.real, g12.imag, m12.real, m12.imag, err, stability, flagged)

    rows = list(pmap(trial, tasks))
    flagged = sum(1 for r in rows if r[-1])
    return rows, len(tasks), 0, {"flagged_rows": flagged}


EXPERIMENTS = {
    "annealed_gap": _run_annealed_gap,
    "quenched_bulk_sampling": _run_quenched_bulk,
    "monoparametric_quenched": _run_monoparametric,
    "ks_convergence": _run_ks_convergence,
    "overlap_decay": _run_overlap_decay,
    "local_law_check": _run_local_law,
}
