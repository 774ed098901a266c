"""Build script for the optional compiled SDE kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so a failing C build only costs speed.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "rmtq._kernels._core",
                ["src/rmtq/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError as exc:  # pragma: no cover - build environment dependent
    sys.stderr.write(f"rmtq: skipping compiled kernel build ({exc})\n")

setup(ext_modules=ext_modules)
