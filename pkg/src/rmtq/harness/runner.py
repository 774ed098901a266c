"""Experiment execution and deterministic CSV/metadata output.

Trials run through an order-preserving map (serial or thread pool); rows are
always written in schedule order, so identical config + seed gives
byte-identical CSV at any thread count.
"""

from __future__ import annotations

import json
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import rmtq
from rmtq import _kernels
from rmtq.harness.config import ExperimentConfig
from rmtq.harness.experiments import COLUMNS, EXPERIMENTS

__all__ = ["RunResult", "execute", "write_outputs", "format_value"]


@dataclass
class RunResult:
    kind: str
    header: list[str]
    rows: list[tuple]
    scheduled: int
    emitted: int
    skipped: int
    meta: dict


def _make_pmap(threads: int):
    if threads <= 1:
        return lambda fn, items: [fn(it) for it in items]

    def pmap(fn, items):
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))

    return pmap


def execute(cfg: ExperimentConfig, threads: int = 1, dry_run: bool = False) -> RunResult:
    """Run (or, with dry_run, only schedule-check) one experiment."""
    run_fn = EXPERIMENTS[cfg.kind]
    header = COLUMNS[cfg.kind]
    meta = {
        "schema": cfg.schema,
        "experiment": cfg.kind,
        "seed": cfg.seed,
        "config": cfg.echo(),
        "package_version": rmtq.__version__,
        "git_describe": _git_describe(),
        "kernel_backend": _kernels.backend_name,
    }
    if dry_run:
        schedule = {
            "sizes": list(cfg.sizes),
            "repetitions": cfg.repetitions,
            "samples": cfg.samples,
        }
        meta["dry_run_schedule"] = schedule
        return RunResult(cfg.kind, header, [], 0, 0, 0, meta)
    rows, scheduled, skipped, extra = run_fn(cfg, _make_pmap(threads))
    meta.update(extra)
    meta["row_accounting"] = {
        "scheduled": scheduled,
        "emitted": len(rows),
        "skipped": skipped,
    }
    return RunResult(cfg.kind, header, rows, scheduled, len(rows), skipped, meta)


def format_value(value) -> str:
    """CSV cell formatting: 12 significant digits for floats, plain otherwise."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, str)):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, complex):
        return f"{value.real:.12g}{value.imag:+.12g}j"
    return str(value)


def write_outputs(result: RunResult, csv_path: str | Path) -> tuple[Path, Path]:
    """Write the CSV and its companion <name>.meta.json; returns both paths."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(result.header) + "\n")
        for row in result.rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")
    meta_path = csv_path.with_suffix(csv_path.suffix + ".meta.json")
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(result.meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, meta_path


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"
