"""Command-line interface: `rmtq run | ref | check`.

BLAS threading is pinned to one thread per process (unless the user already
set the usual environment variables) *before* numpy is imported, so trial
results do not depend on the machine's core count; parallelism happens at the
trial level via --threads / RMTQ_THREADS.
"""

import os

for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import argparse
import sys
from pathlib import Path

from rmtq.errors import RmtqError

__all__ = ["main"]


def _default_threads() -> int:
    env = os.environ.get("RMTQ_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise RmtqError(f"RMTQ_THREADS must be an integer, got {env!r}") from None
    return 1


def _cmd_run(args) -> int:
    from rmtq.harness.config import load_config
    from rmtq.harness.runner import execute, write_outputs

    cfg = load_config(args.config, seed=args.seed, out=args.out, paper_scale=args.paper_scale)
    threads = args.threads if args.threads else _default_threads()
    result = execute(cfg, threads=threads, dry_run=args.dry_run)
    if args.dry_run:
        sched = result.meta["dry_run_schedule"]
        print(f"[dry-run] kind={cfg.kind} seed={cfg.seed} threads={threads}")
        print(f"[dry-run] sizes={sched['sizes']} repetitions={sched['repetitions']} "
              f"samples={sched['samples']}")
        print(f"[dry-run] columns: {','.join(result.header)}")
        return 0
    out = cfg.out or f"{cfg.kind}.csv"
    csv_path, meta_path = write_outputs(result, out)
    print(f"wrote {csv_path} ({result.emitted} rows, {result.skipped} skipped) and {meta_path}")
    return 0


def _cmd_ref(args) -> int:
    import numpy as np

    from rmtq import gapref

    grid = np.linspace(0.0, args.s_max, args.points)
    if args.provenance == "painleve":
        sig = gapref.solve_sigma(t_max=float(np.pi * args.s_max + 1.0))
        ref = gapref.p2_from_sigma(sig, grid) if args.beta == 2 else gapref.p1_from_sigma(sig, grid)
    elif args.provenance == "surmise":
        ref = gapref.wigner_surmise(args.beta, grid)
    else:
        if args.beta != 2:
            raise RmtqError("the Fredholm oracle is available for beta=2 only")
        ref = gapref.fredholm_p2_oracle(grid[grid >= 2e-3])
    out = args.out or f"gap_reference_beta{args.beta}_{args.provenance}.csv"
    ref.to_csv(out)
    print(f"wrote {out} ({ref.s.size} points, provenance={ref.provenance})")
    return 0


def _cmd_check(args) -> int:
    from rmtq.harness.checks import run_checks

    return run_checks(fast=args.fast)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rmtq",
        description="Quenched vs annealed random-matrix gap statistics laboratory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", type=str, default=None, help="output CSV path")
    p_run.add_argument("--threads", type=int, default=0,
                       help="trial-level worker threads (default: RMTQ_THREADS or 1)")
    p_run.add_argument("--paper-scale", action="store_true",
                       help="restore the full figure protocols instead of desk-scale defaults")
    p_run.add_argument("--dry-run", action="store_true",
                       help="validate the config and print the schedule without sampling")
    p_run.set_defaults(fn=_cmd_run)

    p_ref = sub.add_parser("ref", help="emit a reference gap-distribution table")
    p_ref.add_argument("--beta", type=int, choices=(1, 2), required=True)
    p_ref.add_argument("--provenance", choices=("painleve", "surmise", "fredholm"),
                       default="painleve")
    p_ref.add_argument("--s-max", type=float, default=5.0)
    p_ref.add_argument("--points", type=int, default=5001)
    p_ref.add_argument("--out", type=str, default=None)
    p_ref.set_defaults(fn=_cmd_ref)

    p_check = sub.add_parser("check", help="run the fast oracle suite")
    p_check.add_argument("--fast", action="store_true", help="skip the slower cross-oracles")
    p_check.set_defaults(fn=_cmd_check)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except RmtqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
