"""Hot numeric kernels with a compiled core and a NumPy fallback.

The compiled extension is preferred when present; set the environment
variable ``SCALEFLOW_PURE_PYTHON=1`` before import to force the fallback
(used by the benchmark and the backend-equivalence tests).
"""

import os

from . import _pykernels

if os.environ.get("SCALEFLOW_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "numpy"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels
        BACKEND = "numpy"

trig_eval = _impl.trig_eval
pairwise_sum = _impl.pairwise_sum
pairwise_dot = _impl.pairwise_dot

__all__ = ["trig_eval", "pairwise_sum", "pairwise_dot", "BACKEND"]
