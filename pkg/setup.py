import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("CIRCULANT3_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext = Extension(
            "circulant3._ckernels",
            ["src/circulant3/_ckernels.pyx"],
            extra_compile_args=["-O3"],
        )
        ext.optional = True  # pure-Python fallback is selected at import
        ext_modules = cythonize([ext], language_level=3)
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
