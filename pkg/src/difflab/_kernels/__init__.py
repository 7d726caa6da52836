"""Kernel backend selection.

The compiled Cython core is preferred when its extension module built
successfully; otherwise the pure-NumPy reference twin is used.  Both expose
the same functions with the same semantics, and ``backend.NAME`` reports
which one is active (run manifests record it).
"""

from . import reference

try:
    from . import _core as backend  # type: ignore[attr-defined]
except ImportError:  # extension not built; pure-Python fallback
    backend = reference

BACKEND_NAME = backend.NAME

__all__ = ["backend", "reference", "BACKEND_NAME"]
