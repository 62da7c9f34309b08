"""Builds the optional compiled chain kernels.

The package works without the extension (a pure numpy fallback is selected
at import time); building it just makes forward-backward and Viterbi much
faster. Run `pip install -e . --no-build-isolation` to build in place.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "tmcrf._kernels",
        ["src/tmcrf/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(extensions, language_level=3) if cythonize else [],
)
