"""Shared test configuration.

BLAS threading is pinned before numpy is imported anywhere, so every
eigendecomposition is single-threaded and bit-reproducible; parallelism in
heavy tests happens at the trial level.
"""

import os

for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest


@pytest.fixture(scope="session")
def reference_p2():
    from rmtq.gapref import cached_reference

    return cached_reference(2)


@pytest.fixture(scope="session")
def reference_p1():
    from rmtq.gapref import cached_reference

    return cached_reference(1)


@pytest.fixture(scope="session")
def semicircle_dos():
    from rmtq import mde

    return mde.scdos(mde.DeformationSpectrum.zero(4))


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: release acceptance criteria")
