"""Kernel backend selection.

The compiled extension (``slemc._kernels.fastk``) and the pure-Python
fallback (``slemc._kernels.pure``) expose the same functions and produce
bit-identical output.  The compiled one is picked when importable; set
``SLEMC_BACKEND=pure`` or ``SLEMC_BACKEND=fast`` to force a choice.
"""

import os

from . import pure

_forced = os.environ.get("SLEMC_BACKEND", "").strip().lower()

if _forced == "pure":
    backend = pure
elif _forced == "fast":
    from . import fastk as backend  # noqa: F401  (raises if not built)
else:
    try:
        from . import fastk as backend
    except ImportError:
        backend = pure


def backend_name() -> str:
    return backend.NAME


def get_backend(name=None):
    """Return a kernel module by name ('fast', 'pure', or None for current)."""
    if name is None:
        return backend
    if name == "pure":
        return pure
    if name == "fast":
        from . import fastk
        return fastk
    raise ValueError(f"unknown backend {name!r}")
