"""Build script for the optional compiled DP kernel.

The package works without the extension (a pure-Python kernel is selected
at import time); building it just makes the path solver much faster.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rtflow.solver._dp",
                ["src/rtflow/solver/_dp.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
