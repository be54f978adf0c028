import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension("lorentz._kernels", ["src/lorentz/_kernels.pyx"],
              include_dirs=[numpy.get_include()],
              define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")]),
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
