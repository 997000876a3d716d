import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ROWTRACK_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "rowtrack._scan_cy",
                    sources=["src/rowtrack/_scan_cy.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # No Cython available: install with the pure NumPy kernels only.
        ext_modules = []

setup(ext_modules=ext_modules)
