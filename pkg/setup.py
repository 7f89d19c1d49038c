import os

import numpy as np
from setuptools import Extension, setup

# The compiled kernel core is optional: if Cython (or a C compiler) is
# unavailable the install proceeds and the package falls back to the pure
# numpy backend at import time.
PYX = "src/cutnitsche/_kernels.pyx"
extensions = []
if os.path.exists(PYX):
    try:
        from Cython.Build import cythonize

        extensions = cythonize(
            [
                Extension(
                    "cutnitsche._kernels",
                    [PYX],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=extensions)
