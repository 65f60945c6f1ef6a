"""Build script for the optional compiled BLEU kernel.

The package works without the extension: qeforge.bleu falls back to the
pure-Python n-gram counter at import time if qeforge.bleu._fast is missing.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qeforge.bleu._fast",
                ["src/qeforge/bleu/_fast.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
