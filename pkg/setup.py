"""Builds the optional compiled cascade kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes large batch runs much faster.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "multirisk.kernels._cascade_cy",
                ["src/multirisk/kernels/_cascade_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
