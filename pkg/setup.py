"""Build script: compiles the optional layout-optimizer extension.

The package works without the extension (a pure-Python kernel is selected at
import time); `optional=True` keeps installs working on machines without a C
toolchain.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "distillery.projection._kernel",
        ["src/distillery/projection/_kernel.pyx"],
        # -ffp-contract=off keeps the compiled kernel bit-identical to the
        # pure-Python fallback (no FMA contraction).
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level=3) if cythonize else [])
