import os

import numpy as np
from setuptools import Extension, setup

# SELFSING_NO_EXT=1 skips the compiled kernels; the package then runs on the
# NumPy fallback in selfsing._kernels_py.
ext_modules = []
if not os.environ.get("SELFSING_NO_EXT"):
    from Cython.Build import cythonize

    extensions = [
        Extension(
            "selfsing._kernels",
            ["src/selfsing/_kernels.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
        )
    ]
    ext_modules = cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
