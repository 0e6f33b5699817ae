"""Build the optional compiled kernels.

The package works without them: ``analog_qc.kernels`` falls back to the
numpy implementation when ``analog_qc._ckernels`` cannot be imported.
Set ``ANALOG_QC_NO_EXT=1`` to skip the extension build entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ANALOG_QC_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "analog_qc._ckernels",
                    ["src/analog_qc/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
