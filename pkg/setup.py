"""Build script. The compiled kernels are optional: if Cython or a C
compiler is unavailable the package installs anyway and falls back to
the pure-python reference kernels at import time."""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


def make_extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("setup.py: Cython not found, skipping native kernels", file=sys.stderr)
        return []
    from setuptools import Extension

    ext = Extension(
        "edgepump._kernels._native",
        sources=["src/edgepump/_kernels/_native.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


class optional_build_ext(build_ext):
    """Degrade to a pure-python install instead of failing the build."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:
            print("setup.py: native kernel build failed (%s); "
                  "installing pure-python fallback only" % exc, file=sys.stderr)

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            print("setup.py: compiling %s failed (%s); "
                  "pure-python fallback will be used" % (ext.name, exc),
                  file=sys.stderr)


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
