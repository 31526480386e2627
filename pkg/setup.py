"""Build script: compiles the optional pCN inner-loop extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time); installs on machines without a C toolchain simply
skip it.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TORUSGIBBS_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "torusgibbs._pcn_core",
                    ["src/torusgibbs/_pcn_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
