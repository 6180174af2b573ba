"""Build script: compiles the optional Cython kernel extension.

The extension links against numpy's bundled ``npyrandom`` static library so
its Gaussian/uniform draws come from the exact same C routines the
``numpy.random.Generator`` API uses.  If Cython is unavailable, or
``DPBANDIT_SKIP_EXTENSION`` is set, the package installs without the
extension and falls back to the pure-Python kernels at import time.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("DPBANDIT_SKIP_EXTENSION"):
    import numpy as np

    npyrandom_dir = os.path.abspath(
        os.path.join(np.get_include(), "..", "..", "random", "lib")
    )
    ext = Extension(
        "dpbandit._ckernels",
        ["src/dpbandit/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[npyrandom_dir],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
