import numpy as np
from setuptools import setup, Extension

# The compiled reduction kernel is optional: xxzdw.summation falls back to a
# pure-Python implementation if the extension is absent or fails to build.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "xxzdw._fastsum",
                ["src/xxzdw/_fastsum.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
