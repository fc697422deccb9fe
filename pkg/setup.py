"""Build script. The compiled kernel is optional: if Cython or a C compiler
is unavailable the package installs anyway and falls back to the numpy
implementation at import time (see banachlab.kernel)."""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("LAB_SKIP_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "banachlab._kernel",
                    ["src/banachlab/_kernel.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except Exception as exc:
        print("banachlab: skipping compiled kernel (%s)" % exc)

setup(ext_modules=ext_modules)
