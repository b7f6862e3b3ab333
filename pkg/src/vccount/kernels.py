"""Kernel backend chosen at import: compiled ``_kernels`` when built, else pure Python.

Set ``VCCOUNT_KERNELS=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

python_backend = _kernels_py
compiled_backend = None

if os.environ.get("VCCOUNT_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as compiled_backend  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled_backend = None

active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = active.BACKEND

leaf_removal = active.leaf_removal
reverse_slots = active.reverse_slots
warning_propagation = active.warning_propagation
peel_messages = active.peel_messages
min_cover_size = active.min_cover_size
enumerate_min_covers = active.enumerate_min_covers


def backends():
    """Available kernel modules, compiled first."""
    return [b for b in (compiled_backend, python_backend) if b is not None]
