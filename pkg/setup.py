from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python kernel is selected at import
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("cascade.runtime._ckernel", ["src/cascade/runtime/_ckernel.pyx"],
                   extra_compile_args=["-O2"])],
        language_level=3, quiet=True)

setup(ext_modules=ext_modules)
