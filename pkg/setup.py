import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "hullrom.geometry._ffd_cy",
                ["src/hullrom/geometry/_ffd_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Pure-Python install still works; the numpy kernel is used instead.
    extensions = []

setup(ext_modules=extensions)
