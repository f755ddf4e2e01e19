"""Build the optional Cython core.

The compiled extension is optional: when Cython or a C compiler is missing
the package installs without it and ``lrperc.core`` falls back to the
pure-Python implementation in ``lrperc._pycore``.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("LRPERC_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "lrperc._core",
                    ["src/lrperc/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
