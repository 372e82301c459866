"""Selects the batched-kernel implementation at import time.

The compiled extension is preferred when importable; otherwise the NumPy
fallback is used. Override with the ``WCCE_BACKEND`` environment variable:
``python`` forces the fallback, ``compiled`` requires the extension and
raises ImportError when it is missing.
"""

from __future__ import annotations

import os

from . import _kernels_py

PROB_CLIP = _kernels_py.PROB_CLIP


def _load():
    choice = os.environ.get("WCCE_BACKEND", "auto").strip().lower()
    if choice in ("python", "numpy", "py"):
        return _kernels_py
    try:
        from . import _speedups
    except ImportError:
        if choice == "compiled":
            raise ImportError(
                "WCCE_BACKEND=compiled but the wcce._speedups extension is not built"
            ) from None
        return _kernels_py
    return _speedups


def available_backends() -> dict:
    """All importable kernel implementations, keyed by name."""
    found = {_kernels_py.NAME: _kernels_py}
    try:
        from . import _speedups
    except ImportError:
        pass
    else:
        found[_speedups.NAME] = _speedups
    return found


kernels = _load()
BACKEND_NAME: str = kernels.NAME
