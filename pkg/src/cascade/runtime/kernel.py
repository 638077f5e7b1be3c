"""Selects the compiled kernel when built, the pure-Python one otherwise.

Set CASCADE_PURE_KERNEL=1 to force the fallback.
"""
import os

if os.environ.get("CASCADE_PURE_KERNEL") == "1":
    from . import _pykernel as impl
else:
    try:
        from . import _ckernel as impl
    except ImportError:
        from . import _pykernel as impl

KIND = impl.KIND


def load(kind=None):
    """Kernel module by kind ('compiled' or 'python'); None gives the default."""
    if kind is None:
        return impl
    if kind == "python":
        from . import _pykernel
        return _pykernel
    if kind == "compiled":
        from . import _ckernel
        return _ckernel
    raise ValueError(f"unknown kernel kind {kind!r}")
