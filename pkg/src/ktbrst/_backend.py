"""Kernel selection.

The compiled extension is used when it imports; ``KTBRST_PURE_PYTHON=1``
forces the pure-Python kernels.
"""

import os

if os.environ.get("KTBRST_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernel_py as kernel
    BACKEND = "python"
else:
    try:
        from . import _kernel as kernel  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        from . import _kernel_py as kernel
        BACKEND = "python"

__all__ = ["kernel", "BACKEND"]
