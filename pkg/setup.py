from setuptools import setup, Extension
from Cython.Build import cythonize
import numpy as np


# The compiled thinning kernel must produce the exact same float64 stream as
# the pure-Python reference in hawkeslab._kernel_py, so FP contraction (FMA)
# is disabled explicitly.
ext = Extension(
    "hawkeslab._core",
    ["src/hawkeslab/_core.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O2", "-ffp-contract=off"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level=3))
