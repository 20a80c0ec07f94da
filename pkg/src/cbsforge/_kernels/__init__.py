"""Kernel backend selection.

The compiled extension is preferred when built; the numpy fallback is used
otherwise.  Set CBS_FORGE_BACKEND=python to force the fallback (or =cython
to make a missing extension a hard error).
"""

import os

from . import _phi_py

_requested = os.environ.get("CBS_FORGE_BACKEND", "").strip().lower()

if _requested == "python":
    _impl = _phi_py
else:
    try:
        from . import _phi_cy as _impl
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _phi_py

PhiPlan = _impl.PhiPlan
BACKEND = "python" if _impl is _phi_py else "cython"


def available_backends():
    """Name -> PhiPlan class for every importable backend."""
    out = {"python": _phi_py.PhiPlan}
    try:
        from . import _phi_cy
        out["cython"] = _phi_cy.PhiPlan
    except ImportError:
        pass
    return out
