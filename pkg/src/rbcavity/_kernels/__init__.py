"""Propagation kernel selection.

The compiled Cython kernel is preferred when its extension module built;
otherwise the pure-NumPy twin (same algorithm) is used.  Set
RBCAVITY_KERNEL=numpy or =cython to force a choice; see
benchmarks/bench_kernels.py for a speed comparison.
"""

import os

from . import _pykernel

_requested = os.environ.get("RBCAVITY_KERNEL", "").lower()

if _requested in ("numpy", "py", "python"):
    _impl = _pykernel
elif _requested in ("cython", "cy", "c"):
    from . import _cykernel as _impl
else:
    try:
        from . import _cykernel as _impl
    except ImportError:
        _impl = _pykernel

propagate = _impl.propagate
lindblad_apply = _impl.lindblad_apply
BACKEND = _impl.BACKEND


def backend() -> str:
    """Name of the active propagation backend ('cython' or 'numpy')."""
    return BACKEND
