"""Build script for the optional compiled kernels.

The package works without the extension (a numpy fallback is selected at
import time), so failure to cythonize is not fatal for development
installs: run with TWINFOCK_KERNELS=python to force the fallback.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "twinfock._kernels._native",
                ["src/twinfock/_kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
