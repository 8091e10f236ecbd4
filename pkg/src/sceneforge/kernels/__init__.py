"""Hot numeric kernels with a compiled core and a NumPy fallback.

The compiled Cython extension (``_core``) is preferred when importable;
otherwise the pure-NumPy twin (``pyref``) is used.  Set
``SCENEFORGE_KERNELS=python`` or ``=compiled`` to force a backend
(``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import pyref

_requested = os.environ.get("SCENEFORGE_KERNELS", "auto").lower()

if _requested not in ("auto", "python", "compiled"):
    raise RuntimeError(f"SCENEFORGE_KERNELS must be auto|python|compiled, got {_requested!r}")

if _requested == "python":
    _impl = pyref
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = pyref
        BACKEND = "python"

KDE_WRAPS = pyref.KDE_WRAPS
SQRT_2PI = pyref.SQRT_2PI

kde_density = _impl.kde_density
boxes_overlap = _impl.boxes_overlap
rect_outside_fraction = _impl.rect_outside_fraction
segment_box_hits = _impl.segment_box_hits
