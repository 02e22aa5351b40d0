"""Pure numpy gate kernels; used when the compiled extension is unavailable.

All functions act in place on a C-contiguous complex128 vector of length 2^n.
"""

from __future__ import annotations

import math

import numpy as np


def _pair_view(state: np.ndarray, q: int) -> np.ndarray:
    # axes: (higher bits, bit q+1, bit q, lower bits)
    return state.reshape(-1, 2, 2, 1 << q)


def apply_givens(state: np.ndarray, q: int, theta: float) -> None:
    v = _pair_view(state, q)
    c, s = math.cos(theta), math.sin(theta)
    a = v[:, 0, 1, :].copy()
    b = v[:, 1, 0, :]
    v[:, 0, 1, :] = c * a + s * b
    v[:, 1, 0, :] = c * b - s * a


def apply_phase(state: np.ndarray, q: int, beta: float) -> None:
    v = state.reshape(-1, 2, 1 << q)
    v[:, 1, :] *= complex(math.cos(beta), math.sin(beta))


def apply_pauli(state: np.ndarray, q: int, kind: str) -> None:
    v = state.reshape(-1, 2, 1 << q)
    if kind == "Z":
        v[:, 1, :] *= -1
        return
    a = v[:, 0, :].copy()
    if kind == "X":
        v[:, 0, :] = v[:, 1, :]
        v[:, 1, :] = a
    elif kind == "Y":
        v[:, 0, :] = -1j * v[:, 1, :]
        v[:, 1, :] = 1j * a
    else:
        raise ValueError(f"unknown Pauli {kind!r}")


def apply_ladder(state: np.ndarray, q: int, kind: str) -> None:
    """``+``: sigma^+ = |0><1|; ``-``: sigma^- = |1><0|."""
    v = state.reshape(-1, 2, 1 << q)
    if kind == "+":
        v[:, 0, :] = v[:, 1, :]
        v[:, 1, :] = 0
    elif kind == "-":
        v[:, 1, :] = v[:, 0, :]
        v[:, 0, :] = 0
    else:
        raise ValueError(f"unknown ladder operator {kind!r}")


def apply_diagonal_phase(state: np.ndarray, phases: np.ndarray) -> None:
    np.multiply(state, phases, out=state)
