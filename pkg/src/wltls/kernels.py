"""Kernel backend selection.

The compiled extension is used when it was built; set
``WLTLS_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
arow_train_edge = _pykernels.arow_train_edge
viterbi_batch = _pykernels.viterbi_batch

if not os.environ.get("WLTLS_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:
        _ckernels = None
    else:
        BACKEND = "cython"
        arow_train_edge = _ckernels.arow_train_edge
        viterbi_batch = _ckernels.viterbi_batch


def backends():
    """Available kernel modules keyed by name (for benchmarks and tests)."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels as ck
    except ImportError:
        pass
    else:
        found["cython"] = ck
    return found
