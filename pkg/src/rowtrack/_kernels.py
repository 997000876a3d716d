"""Selects the scan kernel backend at import time.

The compiled extension is preferred; the NumPy implementation is the
fallback. Set ROWTRACK_PURE_PYTHON=1 to force the fallback (used by the
benchmark and the backend parity tests).
"""

from __future__ import annotations

import os

if os.environ.get("ROWTRACK_PURE_PYTHON") == "1":
    from rowtrack import _scan_py as _impl

    BACKEND = "python"
else:
    try:
        from rowtrack import _scan_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from rowtrack import _scan_py as _impl

        BACKEND = "python"

column_sums = _impl.column_sums
row_sums = _impl.row_sums
line_scores = _impl.line_scores
