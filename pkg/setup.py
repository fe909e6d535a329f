"""Build script: compiles the optional Cython matching kernel.

Set MZEMBED_PURE_PYTHON=1 to skip the extension entirely; the package
falls back to the pure-Python kernel at import time either way.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("MZEMBED_PURE_PYTHON") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "mzembed.kernels._matching",
                    ["src/mzembed/kernels/_matching.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
