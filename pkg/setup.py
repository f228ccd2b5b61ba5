"""Build the optional compiled kernels.

The package works without them; ``burgers_mrt.kernels`` falls back to the
NumPy implementation when ``burgers_mrt._kernels`` cannot be imported.
"""
import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, OpenMP missing, ...
            print(f"WARNING: compiled kernels not built ({exc}); using NumPy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: failed to build {ext.name} ({exc}); using NumPy fallback")


def extensions():
    if os.environ.get("BURGERS_MRT_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    openmp = [] if os.environ.get("BURGERS_MRT_NO_OPENMP") else ["-fopenmp"]
    ext = Extension(
        "burgers_mrt._kernels",
        ["src/burgers_mrt/_kernels.pyx"],
        extra_compile_args=["-O3"] + openmp,
        extra_link_args=openmp,
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
