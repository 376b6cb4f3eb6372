"""Kernel backend selection.

The compiled extension is preferred when importable; the NumPy reference
implementation is the fallback.  Set ``ORDBRIDGE_KERNEL=python`` to force the
fallback (used by the benchmark and the parity tests).
"""

import os

from . import _kernels_py

if os.environ.get("ORDBRIDGE_KERNEL", "").lower() in {"py", "python", "ref"}:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_c as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

cumlogit_terms = _impl.cumlogit_terms
cumlogit_pointwise = _impl.cumlogit_pointwise
bridge_terms = _impl.bridge_terms
LOG_PROB_FLOOR = _kernels_py.LOG_PROB_FLOOR
