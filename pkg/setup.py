"""Build script. The compiled kernel core is optional: if Cython is not
available the package falls back to the pure numpy kernels at import time.

Build in place with: python setup.py build_ext --inplace
"""

import os

from setuptools import setup

PYX = "src/phaseshadow/core/_speedups.pyx"

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None and os.path.exists(PYX):
    ext_modules = cythonize(
        [PYX],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
