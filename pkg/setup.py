"""Build script: compiles the optional fast kernels.

The compiled extension is a pure speedup; if Cython or a C compiler is
missing the install still succeeds and d2sim falls back to the pure-Python
kernels at import time.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext

try:
    from setuptools import Extension
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("d2sim._native", ["src/d2sim/_native.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []


class OptionalBuildExt(build_ext):
    """Treat extension build failures as a soft error."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping native kernels ({exc})", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: {ext.name} not built ({exc})", file=sys.stderr)


setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})
