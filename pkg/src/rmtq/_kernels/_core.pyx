# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled SDE kernels: pairwise repulsion drift and the substep loop.

Mirrors rmtq._kernels.fallback; one normals row is consumed per attempted
substep so both backends draw identically from the generator.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()

STATUS_DONE = 0
STATUS_NEED_NORMALS = 1
STATUS_ORDER_FAIL = -1


cdef void _drift_into(double[::1] lams, double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = lams.shape[0]
    cdef Py_ssize_t i, j
    cdef double inv
    for i in range(n):
        out[i] = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            inv = 1.0 / (lams[i] - lams[j])
            out[i] += inv
            out[j] -= inv


def dbm_drift(double[::1] lams, out=None):
    """Unnormalized repulsion sum_j!=i 1/(lams[i] - lams[j])."""
    if out is None:
        out = np.empty(lams.shape[0], dtype=np.float64)
    cdef double[::1] view = out
    _drift_into(lams, view)
    return out


def dbm_advance(
    double[::1] lams,
    double t_left,
    double beta,
    int n_weight,
    double[:, ::1] normals,
    double step_safety,
    int max_halvings,
):
    """Advance the eigenvalue SDE in place, consuming rows of ``normals``.

    Returns (time advanced, rows used, status); see the fallback docstring.
    """
    cdef Py_ssize_t n = lams.shape[0]
    cdef Py_ssize_t rows = normals.shape[0]
    cdef double noise_base = sqrt(2.0 / (beta * n_weight))
    cdef double advanced = 0.0
    cdef double cap = INFINITY
    cdef int halvings = 0
    cdef Py_ssize_t used = 0
    cdef double gap_min, dt, g, coef
    cdef Py_ssize_t i
    cdef int ordered
    cdef int failed = 0
    cdef double[::1] drift = np.empty(n, dtype=np.float64)
    cdef double[::1] prop = np.empty(n, dtype=np.float64)

    with nogil:
        while t_left > 0.0 and used < rows:
            gap_min = INFINITY
            for i in range(n - 1):
                g = lams[i + 1] - lams[i]
                if g < gap_min:
                    gap_min = g
            dt = step_safety * n_weight * gap_min * gap_min
            if t_left < dt:
                dt = t_left
            if cap < dt:
                dt = cap
            _drift_into(lams, drift)
            coef = noise_base * sqrt(dt)
            for i in range(n):
                prop[i] = lams[i] + coef * normals[used, i] + (drift[i] / n_weight) * dt
            ordered = 1
            for i in range(n - 1):
                if prop[i + 1] - prop[i] <= 0.0:
                    ordered = 0
                    break
            used += 1
            if ordered:
                for i in range(n):
                    lams[i] = prop[i]
                t_left -= dt
                advanced += dt
                cap = INFINITY
                halvings = 0
            else:
                halvings += 1
                if halvings > max_halvings:
                    failed = 1
                    break
                cap = dt * 0.5

    if failed:
        return advanced, used, STATUS_ORDER_FAIL
    return advanced, used, STATUS_DONE if t_left <= 0.0 else STATUS_NEED_NORMALS
