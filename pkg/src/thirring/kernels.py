"""Selects the compiled gate kernels when present, the numpy ones otherwise.

Set ``THIRRING_KERNELS=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("THIRRING_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

apply_givens = _impl.apply_givens
apply_phase = _impl.apply_phase
apply_pauli = _impl.apply_pauli
apply_ladder = _impl.apply_ladder
apply_diagonal_phase = _impl.apply_diagonal_phase


def backend_module(name: str):
    """Kernel module by name (``python`` or ``cython``), for benchmarks and tests."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
