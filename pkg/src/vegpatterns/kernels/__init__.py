"""Hot-path kernels with backend selection at import time.

The compiled Cython extension is preferred when it was built; the NumPy
reference implementation is the fallback and the semantic ground truth.
Set ``VEGPATTERNS_PURE_PYTHON=1`` to force the reference backend.
"""

import os

from . import _reference

if os.environ.get("VEGPATTERNS_PURE_PYTHON", "0") == "1":
    _impl = _reference
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _reference

BACKEND = _impl.BACKEND
PAR_FIELDS = _reference.PAR_FIELDS

rhs_flat = _impl.rhs_flat
jacobian_band = _impl.jacobian_band

reference = _reference


def available_backends():
    """Names of importable kernel backends, reference always included."""
    names = ["reference"]
    try:
        from . import _core  # noqa: F401
        names.append("compiled")
    except ImportError:
        pass
    return names
