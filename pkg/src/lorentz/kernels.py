"""Kernel backend selection.

The compiled extension is used when it imports; setting ``LORENTZ_PURE_PYTHON=1``
forces the numpy fallback.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback
if os.environ.get("LORENTZ_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _fallback

longest_paths = _impl.longest_paths
reverse_triangle_defects = _impl.reverse_triangle_defects
sup_distance = _impl.sup_distance
maxplus = _impl.maxplus
extension_scan = _impl.extension_scan

__all__ = [
    "BACKEND",
    "longest_paths",
    "reverse_triangle_defects",
    "sup_distance",
    "maxplus",
    "extension_scan",
]
