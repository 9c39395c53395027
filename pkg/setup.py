"""Build script for the optional compiled neighbor-search kernel.

The package works without the extension: wknn._kernels falls back to a
pure-NumPy implementation when the compiled module is missing.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from setuptools import Extension
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "wknn._kernels._brute",
                sources=["src/wknn/_kernels/_brute.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
