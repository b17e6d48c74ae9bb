"""Pick the kernel implementation once, at import.

Set ``SELFSING_BACKEND=python`` to force the NumPy fallback even when the
compiled extension is importable.
"""

import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if os.environ.get("SELFSING_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled
        BACKEND = "compiled"


def get_kernels(name=None):
    """Return the kernel module named ``"python"`` or ``"compiled"``."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels as compiled

        return compiled
    raise ValueError(f"unknown backend {name!r}")
