"""Build script: compiles the optional extension kernels.

The package works without the extension (a pure-numpy fallback is selected
at import time), so a failed compile only costs speed.

No -march/-ffast-math flags: kernels must match the numpy fallback bit for
bit, which rules out FMA contraction and relaxed float semantics.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "tailab._kernels._core",
                ["src/tailab/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
