"""Build hook for the optional compiled kernel backend.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so any failure here is downgraded to a warning
rather than aborting the install.
"""

import warnings

from setuptools import setup


def maybe_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        warnings.warn(f"compiled kernels skipped ({exc}); using numpy fallback")
        return []
    ext = Extension(
        "robinhardy._kernels._core",
        sources=["src/robinhardy/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    try:
        return cythonize([ext], language_level="3")
    except Exception as exc:  # cython parse/codegen trouble
        warnings.warn(f"cythonize failed ({exc}); using numpy fallback")
        return []


setup(ext_modules=maybe_extensions())
