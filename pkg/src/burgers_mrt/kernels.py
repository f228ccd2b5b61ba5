"""Backend selection for the hot kernels.

The compiled extension is used when importable; set
``BURGERS_MRT_BACKEND=python`` to force the NumPy fallback.
"""
import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled


def available():
    return sorted(_BACKENDS)


def get_backend(name=None):
    """Return the kernel module for ``name`` (None picks the default)."""
    if name is None:
        name = DEFAULT
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available()}") from None


_requested = os.environ.get("BURGERS_MRT_BACKEND")
if _requested:
    if _requested not in _BACKENDS:
        raise ImportError(f"BURGERS_MRT_BACKEND={_requested!r} not available; have {available()}")
    DEFAULT = _requested
else:
    DEFAULT = "compiled" if _compiled is not None else "python"
