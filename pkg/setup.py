import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    USE_CYTHON = True
except ImportError:
    USE_CYTHON = False

# Set CJDESIGN_NO_EXT=1 to install the pure-Python kernels only.
SKIP_EXT = os.environ.get("CJDESIGN_NO_EXT", "") not in ("", "0")

extensions = []
if USE_CYTHON and not SKIP_EXT:
    extensions = cythonize(
        [
            Extension(
                "cjdesign._kernels",
                ["src/cjdesign/_kernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=extensions)
