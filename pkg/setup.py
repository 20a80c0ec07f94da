"""Build script: compiles the hot-loop kernel extension when Cython is
available.  The package works without it (pure-numpy fallback is selected
at import time), so a failed extension build is not fatal."""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cbsforge._kernels._phi_cy",
                ["src/cbsforge/_kernels/_phi_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
