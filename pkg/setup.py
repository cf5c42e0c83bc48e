import numpy
from setuptools import Extension, setup

# The compiled propagators are optional: if Cython is unavailable the package
# installs pure-Python and marchenko_kit._kernels falls back at import time.
try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "marchenko_kit._kernels._core",
                ["src/marchenko_kit/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
