"""Build script. The compiled stepper is optional: if Cython or a C compiler is
missing the install proceeds with the pure-numpy backend only."""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "fluxcomb._step_cy",
                ["src/fluxcomb/_step_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # no -ffast-math: the python backend must match bit-for-bit
                # within strict IEEE tolerances
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-time only
    import sys

    print(f"fluxcomb: building without compiled stepper ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
