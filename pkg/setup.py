"""Build script for the optional compiled NTT kernels.

The package works without the extension (a pure-Python fallback is selected
at import time); building it makes the encrypted benchmarks fast enough to
be interesting.  If Cython or a C compiler is unavailable the build silently
degrades to the pure-Python kernels.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "heact.he._ntt_cy",
                ["src/heact/he/_ntt_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
