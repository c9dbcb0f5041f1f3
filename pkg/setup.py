"""Build script for the optional compiled propagation kernel.

The extension is marked optional: if no compiler (or Cython) is available the
install still succeeds and the package falls back to the pure-NumPy kernel at
import time.
"""

import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None and os.path.exists("src/rbcavity/_kernels/_cykernel.pyx"):
    ext = Extension(
        "rbcavity._kernels._cykernel",
        ["src/rbcavity/_kernels/_cykernel.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -fcx-limited-range keeps complex multiplies inline (no __muldc3
        # libcalls); the kernel never produces inf/nan intermediates
        extra_compile_args=["-O3", "-fcx-limited-range"],
    )
    ext.optional = True
    extensions = cythonize([ext], language_level=3)

setup(ext_modules=extensions)
