import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("THETAPI_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "thetapi._kernels",
                    ["src/thetapi/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # Pure-Python fallback kernels are selected at import time.
        ext_modules = []

setup(ext_modules=ext_modules)
