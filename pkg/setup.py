"""Build script for the optional compiled recursion kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile should not block installation.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "dpdlab.kernels._rpem",
                ["src/dpdlab/kernels/_rpem.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
