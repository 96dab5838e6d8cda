"""Build script for the compiled kernel extension.

The package works without the extension (a pure numpy/scipy backend is
selected at import time), so a failed Cython build is not fatal for
development installs: run ``pip install -e . --no-build-isolation``.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build environment without Cython
    ext_modules = []
else:
    pyx = os.path.join("src", "udwcavity", "_ckernels.pyx")
    if os.path.exists(pyx):
        ext_modules = cythonize(
            [
                Extension(
                    "udwcavity._ckernels",
                    [pyx],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    else:
        ext_modules = []

setup(ext_modules=ext_modules)
