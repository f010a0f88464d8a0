"""Build script for the optional compiled kernels.

The package works without the extension (a pure numpy/Python fallback is
selected at import time); building it just makes rasterization, labeling,
and contour tracing much faster.  Set SVGLAB_SKIP_EXT=1 to install without
compiling.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SVGLAB_SKIP_EXT"):
    try:
        from Cython.Build import cythonize
        import numpy

        ext_modules = cythonize(
            ["src/svglab/_kernels.pyx"],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
        include_dirs = [numpy.get_include()]
    except ImportError:
        ext_modules = []
        include_dirs = []
else:
    include_dirs = []

setup(
    ext_modules=ext_modules,
    include_dirs=include_dirs,
)
