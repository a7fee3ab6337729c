"""Kernel backend selection.

The compiled extension is preferred when importable; ``TODATAU_KERNEL=py``
forces the pure-Python kernels, ``TODATAU_KERNEL=c`` demands the compiled ones
(raising if the build is absent).  Everything above this module is backend
agnostic.
"""
import os

_requested = os.environ.get("TODATAU_KERNEL", "").strip().lower()

if _requested in ("py", "python"):
    from . import _kernels as kernels
elif _requested in ("c", "cython", "speedups"):
    from . import _speedups as kernels  # type: ignore[no-redef]
else:
    try:
        from . import _speedups as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels as kernels

KERNEL_NAME: str = kernels.KERNEL_NAME
