"""Build glue for the optional compiled SCL decoder core.

The package works without the extension (a pure-numpy decoder is selected at
import time); building it is strongly recommended for simulation speed.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sptdiff.polar._sclcore",
                ["src/sptdiff/polar/_sclcore.pyx"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"warning: building without compiled SCL core ({exc})")

setup(ext_modules=ext_modules)
