"""Build script for the optional Cython selection kernels.

The package works without the compiled extension (a vectorized numpy
fallback is selected at import time), but the per-trial sequential
simulation loops are much faster compiled.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "ocrskit._kernels_cy",
                ["src/ocrskit/_kernels_cy.pyx"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
