"""Build hook for the optional compiled kernel.

The package is pure Python with an optional Cython extension (`todatau._speedups`)
mirroring `todatau._kernels`.  If Cython or a C compiler is unavailable the
extension is skipped and the pure-Python kernels are used at import time.
"""
from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext = Extension(
        "todatau._speedups",
        ["src/todatau/_speedups.pyx"],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
