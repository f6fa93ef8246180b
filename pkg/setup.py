"""Build script for the optional compiled stencil kernels.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so a missing compiler or Cython must not break the
install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cracktip._kernels._core",
                ["src/cracktip/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - depends on build environment
    print(f"cracktip: skipping compiled kernels ({exc}); using pure-python fallback")

setup(ext_modules=ext_modules)
