"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a pure-NumPy twin of every kernel
is selected at import time), so a failed compile only costs speed.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("DIFFLAB_SKIP_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "difflab._kernels._core",
                    sources=["src/difflab/_kernels/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
