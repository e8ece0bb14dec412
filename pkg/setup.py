"""Build the optional Cython kernels.

The extension is marked optional: if Cython or a C compiler is unavailable the
package installs without it and ``wdspca.kernels`` falls back to numpy.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build environment dependent
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "wdspca._ckernels",
                ["src/wdspca/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                # no FMA contraction: the sampler must match the numpy fallback bit for bit
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
