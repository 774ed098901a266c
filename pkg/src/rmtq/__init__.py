"""rmtq: quenched vs annealed random-matrix gap statistics laboratory.

Submodules are imported lazily so the CLI can pin threading environment
variables before numpy loads.
"""

import importlib

__version__ = "0.1.0"

_SUBMODULES = (
    "ensembles",
    "spectral",
    "mde",
    "gapref",
    "dbm",
    "rng",
    "errors",
    "harness",
)


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f"rmtq.{name}")
    raise AttributeError(f"module 'rmtq' has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_SUBMODULES))
