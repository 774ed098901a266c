"""Hot-kernel selection: compiled Cython core with a numpy fallback.

The compiled module is preferred when importable; set RMTQ_KERNEL=numpy (or
=compiled) to force a backend.  ``backend_name`` records the choice so runs
can log which kernel produced them.
"""

from __future__ import annotations

import os

from rmtq._kernels import fallback as _fallback

_forced = os.environ.get("RMTQ_KERNEL", "").strip().lower()

_impl = None
if _forced in ("", "compiled"):
    try:
        from rmtq._kernels import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = None
        if _forced == "compiled":
            raise ImportError(
                "RMTQ_KERNEL=compiled but the compiled kernel is not built; "
                "run `pip install -e . --no-build-isolation` with a C compiler"
            )
elif _forced != "numpy":
    raise ValueError(f"RMTQ_KERNEL must be 'compiled' or 'numpy', got {_forced!r}")

if _impl is None:
    _impl = _fallback

HAVE_COMPILED = _impl is not _fallback
backend_name = "compiled" if HAVE_COMPILED else "numpy"

STATUS_DONE = _fallback.STATUS_DONE
STATUS_NEED_NORMALS = _fallback.STATUS_NEED_NORMALS
STATUS_ORDER_FAIL = _fallback.STATUS_ORDER_FAIL

dbm_drift = _impl.dbm_drift
dbm_advance = _impl.dbm_advance
