"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile degrades to a warning instead of
aborting the install.
"""

import warnings

from setuptools import setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        warnings.warn(f"Cython/NumPy unavailable ({exc}); building without compiled kernels")
        return []
    try:
        return cythonize(
            ["src/sceneforge/kernels/_core.pyx"],
            compiler_directives={"language_level": "3"},
            include_path=[numpy.get_include()],
        )
    except Exception as exc:  # pragma: no cover - build-env dependent
        warnings.warn(f"cythonize failed ({exc}); building without compiled kernels")
        return []


try:
    import numpy

    _include_dirs = [numpy.get_include()]
except ImportError:  # pragma: no cover
    _include_dirs = []

setup(ext_modules=_extensions(), include_dirs=_include_dirs)
