"""Decoder kernel selection: compiled extension if available, numpy fallback.

Set SPTDIFF_PURE_PY=1 to force the fallback (used by the benchmark and the
parity tests).
"""

import os

if os.environ.get("SPTDIFF_PURE_PY"):
    from . import _scl_py as kernel

    COMPILED = False
else:
    try:
        from . import _sclcore as kernel  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        from . import _scl_py as kernel

        COMPILED = False
