"""Build hook for the optional compiled kernel extension.

The package is fully functional without the extension: graph2text.kernels
falls back to the numpy implementations when graph2text._kernels_cy is
absent. Cython and a C compiler are only needed to build the fast path.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "graph2text._kernels_cy",
                ["src/graph2text/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
