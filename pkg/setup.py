from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off keeps the compiled kernels bit-identical to the numpy
# fallback (no FMA contraction), which the backend-equivalence tests rely on.
extensions = [
    Extension(
        "pseudoell._kernels._ckernels",
        ["src/pseudoell/_kernels/_ckernels.pyx"],
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
]

setup(ext_modules=cythonize(extensions, language_level="3"))
