"""Build driver: compiles the Cython kernel when a toolchain is available.

The package stays importable without the extension -- the pure-Python kernel
in ``darboux1d._kernel._pk`` is selected at import time as a fallback.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("DARBOUX1D_SKIP_EXT") != "1" and os.path.exists(
    "src/darboux1d/_kernel/_ck.pyx"
):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "darboux1d._kernel._ck",
                    ["src/darboux1d/_kernel/_ck.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
