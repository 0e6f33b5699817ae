"""Backend selection for the hot signal kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation is. Setting ``ANALOG_QC_PURE_PYTHON=1`` forces the numpy
backend. ``BACKEND`` names the active one.
"""

import os

from ._pykernels import KernelDegenerateState

if os.environ.get("ANALOG_QC_PURE_PYTHON"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        from . import _pykernels as _impl

BACKEND = _impl.NAME

decompose = _impl.decompose
synthesize = _impl.synthesize
evolve_batch = _impl.evolve_batch
measure_batch = _impl.measure_batch

__all__ = [
    "BACKEND",
    "KernelDegenerateState",
    "decompose",
    "synthesize",
    "evolve_batch",
    "measure_batch",
]
