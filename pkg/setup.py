import sys

from setuptools import Extension, setup

# The compiled walk kernel is optional: without Cython (or a C compiler)
# the package installs anyway and qwalklab.sector falls back to the
# numpy implementation at import time.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qwalklab.sector._kernel",
                ["src/qwalklab/sector/_kernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    sys.stderr.write("Cython not found: installing without the compiled walk kernel\n")

setup(ext_modules=ext_modules)
