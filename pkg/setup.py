"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension; ``sparsedyn.kernels``
falls back to pure-numpy implementations when the compiled module is absent.
Set SPARSEDYN_NO_EXT=1 to skip the extension build entirely.
"""
import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, otherwise install pure Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, headers, ...
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(f"WARNING: compiled kernels not built ({exc}); "
              "falling back to pure-Python kernels")


def make_ext_modules():
    if os.environ.get("SPARSEDYN_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "sparsedyn.kernels._ckern",
        ["src/sparsedyn/kernels/_ckern.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=make_ext_modules(),
    cmdclass={"build_ext": optional_build_ext},
)
