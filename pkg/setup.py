"""Build script: compiles the optional simulation kernel extension.

The package works without the extension (a pure-Python engine is selected
at import time), so any failure here degrades to a source-only build.
"""

from setuptools import setup

extensions = []
try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        "src/orbittail/retrial_sim/_engine_cy.pyx",
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    for ext in extensions:
        ext.include_dirs.append(numpy.get_include())
except Exception as exc:  # noqa: BLE001 - any toolchain problem means "no extension"
    print(f"orbittail: building without compiled simulation kernel ({exc!r})")

setup(ext_modules=extensions)
