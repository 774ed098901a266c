"""Pure-numpy implementations of the hot SDE kernels.

Signatures and the random-number consumption pattern match the compiled
module exactly (one normals row per attempted substep), so the two backends
are interchangeable; only floating-point summation order differs.
"""

from __future__ import annotations

import numpy as np

STATUS_DONE = 0
STATUS_NEED_NORMALS = 1
STATUS_ORDER_FAIL = -1


def dbm_drift(lams: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Unnormalized repulsion sum_j!=i 1/(lams[i] - lams[j])."""
    diff = lams[:, None] - lams[None, :]
    np.fill_diagonal(diff, np.inf)
    drift = np.sum(1.0 / diff, axis=1)
    if out is not None:
        out[:] = drift
        return out
    return drift


def dbm_advance(
    lams: np.ndarray,
    t_left: float,
    beta: float,
    n_weight: int,
    normals: np.ndarray,
    step_safety: float,
    max_halvings: int,
) -> tuple[float, int, int]:
    """Advance the eigenvalue SDE in place, consuming rows of ``normals``.

    Each attempted substep consumes one row.  The local step is capped at
    step_safety * n_weight * (min adjacent gap)^2 and halved on an ordering
    violation (fresh noise row per retry).  Returns (time advanced, rows
    used, status).
    """
    n = lams.shape[0]
    noise_base = np.sqrt(2.0 / (beta * n_weight))
    advanced = 0.0
    cap = np.inf
    halvings = 0
    rows = normals.shape[0]
    used = 0
    while t_left > 0.0 and used < rows:
        gap_min = np.min(np.diff(lams)) if n > 1 else np.inf
        dt = min(step_safety * n_weight * gap_min * gap_min, t_left, cap)
        drift = dbm_drift(lams) / n_weight
        prop = lams + (noise_base * np.sqrt(dt)) * normals[used] + drift * dt
        used += 1
        if n == 1 or np.all(np.diff(prop) > 0.0):
            lams[:] = prop
            t_left -= dt
            advanced += dt
            cap = np.inf
            halvings = 0
        else:
            halvings += 1
            if halvings > max_halvings:
                return advanced, used, STATUS_ORDER_FAIL
            cap = dt * 0.5
    status = STATUS_DONE if t_left <= 0.0 else STATUS_NEED_NORMALS
    return advanced, used, status
