"""Build script for the optional compiled trajectory core.

The package works without the extension (a pure-Python integrator is
selected at import time), so a failed Cython build must not abort the
install.
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
                "bosewells.kernels._core",
                ["src/bosewells/kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment specific
    sys.stderr.write(f"bosewells: skipping compiled core ({exc}); "
                     "the pure-Python integrator will be used\n")

setup(ext_modules=ext_modules)
