"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without it — ``wisardflow._kernels`` falls
back to a numpy implementation at import time — so the build degrades
gracefully when no compiler or Cython is available. Set
``WISARDFLOW_SKIP_EXT=1`` to skip the extension on purpose.
"""

import os

from setuptools import setup


def _extensions():
    if os.environ.get("WISARDFLOW_SKIP_EXT") == "1":
        return []
    try:
        from Cython.Build import cythonize
        from setuptools.extension import Extension
    except ImportError:
        return []
    ext = Extension(
        "wisardflow._kernels._ext",
        sources=["src/wisardflow/_kernels/_ext.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize(ext, language_level=3)


setup(ext_modules=_extensions())
