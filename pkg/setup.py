"""Build script: compiles the Cython kernel extension when a toolchain is
available, otherwise installs pure-Python only (the package falls back to the
NumPy reference kernels at import time)."""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "vegpatterns.kernels._core",
                ["src/vegpatterns/kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # keep FP semantics identical to the NumPy reference kernels
                extra_compile_args=["-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError as exc:
    print(f"vegpatterns: building without compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
