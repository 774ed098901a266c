"""Benchmark the compiled SDE kernel against the numpy fallback.

Runs the eigenvalue-SDE substep loop on a GOE spectrum for a bulk-scale
horizon and reports per-backend wall time plus the speedup.  Usage:

    python benchmarks/bench_kernels.py [--n 100 200] [--paths 20]
"""

import argparse
import os
import time

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import numpy as np


def _backends():
    from rmtq._kernels import fallback

    impls = {"numpy": fallback}
    try:
        from rmtq._kernels import _core

        impls["compiled"] = _core
    except ImportError:
        pass
    return impls


def _run(impl, lam0, t_total, rng, chunk=512):
    lams = lam0.copy()
    t_left = t_total
    rows = 0
    while t_left > 0.0:
        normals = rng.standard_normal((chunk, lams.size))
        advanced, used, status = impl.dbm_advance(lams, t_left, 1.0, lams.size, normals, 0.1, 20)
        t_left -= advanced
        rows += used
        if status == impl.STATUS_ORDER_FAIL:
            raise RuntimeError("ordering failure")
        if status == impl.STATUS_DONE:
            break
    return lams, rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, nargs="+", default=[100, 200])
    parser.add_argument("--paths", type=int, default=20)
    args = parser.parse_args()

    from rmtq.ensembles import goe
    from rmtq.rng import derive_substream
    from rmtq.spectral import eigh

    impls = _backends()
    print(f"backends: {', '.join(impls)}   paths per size: {args.paths}")
    header = f"{'N':>6} {'t1':>10}" + "".join(f" {name:>12}" for name in impls) + f" {'speedup':>9}"
    print(header)
    for n in args.n:
        t1 = n ** (-0.8)
        lam0 = eigh(goe(n, derive_substream(0, "bench", n))).eigenvalues
        times = {}
        for name, impl in impls.items():
            rng = derive_substream(1, "bench-noise", n)
            start = time.perf_counter()
            for _ in range(args.paths):
                _run(impl, lam0, t1, rng)
            times[name] = (time.perf_counter() - start) / args.paths
        row = f"{n:>6} {t1:>10.4g}" + "".join(f" {times[name]*1e3:>10.2f}ms" for name in impls)
        if "compiled" in times:
            row += f" {times['numpy'] / times['compiled']:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
