"""Peak-matching kernels: compiled extension with a pure-Python fallback.

The compiled backend is used when the extension built; set
MZEMBED_PURE_PYTHON=1 to force the fallback. Both produce bit-identical
scores, so the choice only affects speed.
"""

import os

from . import _reference

if os.environ.get("MZEMBED_PURE_PYTHON", "") == "1":
    _impl = _reference
    BACKEND = "python"
else:
    try:
        from . import _matching as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _reference
        BACKEND = "python"

score_modified_cosine = _impl.score_modified_cosine

__all__ = ["BACKEND", "score_modified_cosine"]
