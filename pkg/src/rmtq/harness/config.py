"""Experiment configuration: INI files with a strict, versioned schema.

A config is a single key-value file with nested sections ([experiment],
[ensemble], [deformation], [param], [run]).  Unknown sections or keys are
errors, every run needs an explicit seed (no wall-clock seeding), and
``--paper-scale`` swaps the desk-scale defaults for the full figure
protocols.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from rmtq.ensembles import (
    EntryLaw,
    ParamLaw,
    SymmetryClass,
    TruncatedGaussianChi,
    UniformChi,
)
from rmtq.errors import ConfigError

SCHEMA_VERSION = 1

KINDS = (
    "annealed_gap",
    "quenched_bulk_sampling",
    "monoparametric_quenched",
    "ks_convergence",
    "overlap_decay",
    "local_law_check",
)

RESCALINGS = ("mde", "semicircle", "scaled_semicircle")


def _parse_int(raw: str) -> int:
    return int(raw.strip())


def _parse_float(raw: str) -> float:
    return float(raw.strip())


def _parse_str(raw: str) -> str:
    return raw.strip()


def _parse_int_list(raw: str) -> tuple[int, ...]:
    parts = [p for chunk in raw.split(",") for p in chunk.split()]
    if not parts:
        raise ValueError("empty list")
    return tuple(int(p) for p in parts)


# section -> key -> parser
_SCHEMA = {
    "experiment": {
        "schema": _parse_int,
        "kind": _parse_str,
        "seed": _parse_int,
        "out": _parse_str,
    },
    "ensemble": {
        "symmetry": _parse_str,
        "entries": _parse_str,
        "sizes": _parse_int_list,
        "max_size": _parse_int,
    },
    "deformation": {
        "a": _parse_str,
        "b": _parse_str,
    },
    "param": {
        "a_exponent": _parse_float,
        "law": _parse_str,
        "cut": _parse_float,
        "lo": _parse_float,
        "hi": _parse_float,
    },
    "run": {
        "samples": _parse_int,
        "repetitions": _parse_int,
        "rescaling": _parse_str,
        "arms": _parse_str,
        "x1": _parse_float,
        "x2": _parse_float,
        "eta_exponent": _parse_float,
        "energy": _parse_float,
        "window_lo": _parse_float,
        "window_hi": _parse_float,
        "mode": _parse_str,
    },
}

ARMS = ("both", "gauss", "mono")

A_RECIPES = ("wigner", "identity", "diag_pm1", "none")
B_RECIPES = ("none",)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, fully resolved experiment description."""

    kind: str
    seed: int
    out: str | None
    symmetry: SymmetryClass
    entries: EntryLaw
    sizes: tuple[int, ...]
    max_size: int
    deformation_a: str
    deformation_b: str
    param: ParamLaw
    samples: int
    repetitions: int
    rescaling: str
    arms: str
    x1: float
    x2: float
    eta_exponent: float
    energy: float
    window: tuple[float, float] | None
    mode: str
    paper_scale: bool
    schema: int = SCHEMA_VERSION

    @property
    def beta(self) -> int:
        return self.symmetry.beta

    def echo(self) -> dict:
        """Plain-dict echo of the effective configuration for metadata files."""
        return {
            "schema": self.schema,
            "kind": self.kind,
            "seed": self.seed,
            "symmetry": self.symmetry.name.lower(),
            "entries": self.entries.value,
            "sizes": list(self.sizes),
            "max_size": self.max_size,
            "deformation_a": self.deformation_a,
            "deformation_b": self.deformation_b,
            "param": {
                "a_exponent": self.param.a,
                "law": self.param.chi.__class__.__name__,
                "params": vars(self.param.chi),
            },
            "samples": self.samples,
            "repetitions": self.repetitions,
            "rescaling": self.rescaling,
            "arms": self.arms,
            "x1": self.x1,
            "x2": self.x2,
            "eta_exponent": self.eta_exponent,
            "energy": self.energy,
            "window": list(self.window) if self.window else None,
            "mode": self.mode,
            "paper_scale": self.paper_scale,
        }


# Desk-scale defaults per kind; --paper-scale restores the figure protocols.
_DESK_DEFAULTS: dict[str, dict] = {
    "annealed_gap": dict(sizes=(100,), samples=5000, repetitions=1),
    "quenched_bulk_sampling": dict(sizes=(2000,), samples=1, repetitions=1),
    "monoparametric_quenched": dict(sizes=(2, 100, 1000), samples=2000, repetitions=1),
    "ks_convergence": dict(sizes=(4, 16, 64, 256), samples=100, repetitions=25),
    "overlap_decay": dict(sizes=(256, 512, 1024), samples=20, repetitions=1),
    "local_law_check": dict(sizes=(250, 500, 1000), samples=20, repetitions=1),
}

_PAPER_OVERRIDES: dict[str, dict] = {
    "quenched_bulk_sampling": dict(sizes=(5000,), max_size=5000),
    "ks_convergence": dict(sizes=(2, 4, 8, 16, 32, 64, 128, 256, 512), repetitions=50),
}

DEFAULT_MAX_SIZE = 4096  # dense desk-scale guard; raise via [ensemble] max_size


def _read_ini(path: Path) -> dict[str, dict[str, object]]:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    data: dict[str, dict[str, object]] = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        data[section] = {}
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                known = ", ".join(sorted(_SCHEMA[section]))
                raise ConfigError(f"unknown key '{key}' in [{section}] (known: {known})")
            try:
                data[section][key] = _SCHEMA[section][key](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for [{section}] {key} = {raw!r}: {exc}") from exc
    return data


def _build_param(section: dict) -> ParamLaw:
    law = section.get("law", "gaussian")
    a = float(section.get("a_exponent", 0.0))
    if law == "gaussian":
        chi = TruncatedGaussianChi(cut=float(section.get("cut", 10.0)))
    elif law == "uniform":
        chi = UniformChi(lo=float(section.get("lo", 0.0)), hi=float(section.get("hi", 1.0)))
    else:
        raise ConfigError(f"unknown param law {law!r} (gaussian | uniform)")
    return ParamLaw(a=a, chi=chi)


def load_config(
    path: str | Path,
    seed: int | None = None,
    out: str | None = None,
    paper_scale: bool = False,
) -> ExperimentConfig:
    """Parse and validate a config file; CLI overrides win over file values."""
    data = _read_ini(Path(path))
    exp = data.get("experiment", {})
    if "schema" not in exp:
        raise ConfigError("missing [experiment] schema version")
    if exp["schema"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema {exp['schema']}; this build reads {SCHEMA_VERSION}")
    kind = exp.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {KINDS}")
    eff_seed = seed if seed is not None else exp.get("seed")
    if eff_seed is None:
        raise ConfigError("a seed is required (config [experiment] seed or --seed)")

    defaults = dict(_DESK_DEFAULTS[kind])
    if paper_scale:
        defaults.update(_PAPER_OVERRIDES.get(kind, {}))

    ens = data.get("ensemble", {})
    sym_name = ens.get("symmetry", "complex")
    try:
        symmetry = {
            "real": SymmetryClass.REAL_SYMMETRIC,
            "complex": SymmetryClass.COMPLEX_HERMITIAN,
        }[sym_name]
    except KeyError:
        raise ConfigError(f"symmetry must be 'real' or 'complex', got {sym_name!r}") from None
    try:
        entries = EntryLaw(ens.get("entries", "gaussian"))
    except ValueError:
        raise ConfigError(f"unknown entry law {ens.get('entries')!r}") from None
    sizes = tuple(ens.get("sizes", defaults["sizes"]))
    if any(n < 1 for n in sizes) or not sizes:
        raise ConfigError(f"sizes must be positive, got {sizes}")
    max_size = int(ens.get("max_size", defaults.get("max_size", DEFAULT_MAX_SIZE)))

    deform = data.get("deformation", {})
    deformation_a = deform.get("a", "wigner" if kind in (
        "monoparametric_quenched", "ks_convergence", "overlap_decay", "local_law_check") else "none")
    deformation_b = deform.get("b", "none")
    if deformation_a not in A_RECIPES:
        raise ConfigError(f"deformation a must be one of {A_RECIPES}, got {deformation_a!r}")
    if deformation_b not in B_RECIPES:
        raise ConfigError(f"deformation b must be one of {B_RECIPES}, got {deformation_b!r}")

    run = data.get("run", {})
    samples = int(run.get("samples", defaults["samples"]))
    repetitions = int(run.get("repetitions", defaults["repetitions"]))
    if samples < 1 or repetitions < 1:
        raise ConfigError("samples and repetitions must be >= 1")
    rescaling = run.get("rescaling", "mde")
    if rescaling not in RESCALINGS:
        raise ConfigError(f"rescaling must be one of {RESCALINGS}, got {rescaling!r}")
    arms = run.get("arms", "both")
    if arms not in ARMS:
        raise ConfigError(f"arms must be one of {ARMS}, got {arms!r}")
    window = None
    if "window_lo" in run or "window_hi" in run:
        if not ("window_lo" in run and "window_hi" in run):
            raise ConfigError("window_lo and window_hi must be given together")
        window = (float(run["window_lo"]), float(run["window_hi"]))
        if window[0] >= window[1]:
            raise ConfigError(f"empty energy window {window}")
    mode = run.get("mode", "standard")
    if mode not in ("standard", "ward"):
        raise ConfigError(f"mode must be 'standard' or 'ward', got {mode!r}")
    x1 = float(run.get("x1", 0.0))
    x2 = float(run.get("x2", 0.5))
    if kind == "local_law_check" and (x1 < 0 or x2 < 0):
        raise ConfigError("local_law_check requires x1, x2 >= 0 (shared-basis ordering)")

    cfg = ExperimentConfig(
        kind=kind,
        seed=int(eff_seed),
        out=out if out is not None else exp.get("out"),
        symmetry=symmetry,
        entries=entries,
        sizes=sizes,
        max_size=max_size,
        deformation_a=deformation_a,
        deformation_b=deformation_b,
        param=_build_param(data.get("param", {})),
        samples=samples,
        repetitions=repetitions,
        rescaling=rescaling,
        arms=arms,
        x1=x1,
        x2=x2,
        eta_exponent=float(run.get("eta_exponent", 0.4)),
        energy=float(run.get("energy", 0.0)),
        window=window,
        mode=mode,
        paper_scale=paper_scale,
    )
    _semantic_checks(cfg)
    return cfg


def make_config(kind: str, seed: int, paper_scale: bool = False, **overrides) -> ExperimentConfig:
    """Programmatic construction with the same defaults and validation."""
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    defaults = dict(_DESK_DEFAULTS[kind])
    if paper_scale:
        defaults.update(_PAPER_OVERRIDES.get(kind, {}))
    base = ExperimentConfig(
        kind=kind,
        seed=seed,
        out=None,
        symmetry=SymmetryClass.COMPLEX_HERMITIAN,
        entries=EntryLaw.GAUSSIAN,
        sizes=tuple(defaults["sizes"]),
        max_size=defaults.get("max_size", DEFAULT_MAX_SIZE),
        deformation_a="wigner"
        if kind in ("monoparametric_quenched", "ks_convergence", "overlap_decay", "local_law_check")
        else "none",
        deformation_b="none",
        param=ParamLaw(),
        samples=defaults["samples"],
        repetitions=defaults["repetitions"],
        rescaling="mde",
        arms="both",
        x1=0.0,
        x2=0.5,
        eta_exponent=0.4,
        energy=0.0,
        window=None,
        mode="standard",
        paper_scale=paper_scale,
    )
    cfg = replace(base, **overrides)
    _semantic_checks(cfg)
    return cfg


def _semantic_checks(cfg: ExperimentConfig) -> None:
    if max(cfg.sizes) > cfg.max_size:
        raise ConfigError(
            f"size {max(cfg.sizes)} exceeds the dense-storage cap {cfg.max_size}; "
            "raise [ensemble] max_size explicitly if intended"
        )
    if cfg.kind in ("monoparametric_quenched", "ks_convergence") and min(cfg.sizes) < 2:
        raise ConfigError("middle-gap experiments need N >= 2")
    if cfg.arms not in ARMS:
        raise ConfigError(f"arms must be one of {ARMS}, got {cfg.arms!r}")
    if cfg.kind in ("overlap_decay", "local_law_check") and cfg.deformation_a == "none":
        raise ConfigError(f"{cfg.kind} requires a deformation direction A")
    if cfg.kind == "local_law_check" and (cfg.x1 < 0 or cfg.x2 < 0):
        raise ConfigError("local_law_check requires x1, x2 >= 0")
