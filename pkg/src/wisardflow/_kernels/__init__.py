"""Hot-kernel backend selection.

Imports the compiled Cython extension when it is built; otherwise (or when
``WISARDFLOW_PURE=1`` is set) falls back to the numpy implementation. Both
backends are semantically identical and are compared on randomized inputs by
the test suite. ``BACKEND`` names the active one.
"""

from __future__ import annotations

import os

if os.environ.get("WISARDFLOW_PURE") == "1":
    from . import fallback as _impl
else:
    try:
        from . import _ext as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import fallback as _impl

BACKEND: str = _impl.BACKEND
shuffle_indices = _impl.shuffle_indices
extract_addresses_T = _impl.extract_addresses_T
evaluate_rep = _impl.evaluate_rep
