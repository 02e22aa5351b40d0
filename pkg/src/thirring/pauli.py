"""Weighted sums of Pauli strings.

A string is a ``str`` over ``IXYZ`` whose character ``n`` acts on qubit ``n``.
Basis index bit ``n`` is the computational state of qubit ``n`` (little endian),
so ``"XI"`` flips the lowest bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp

ZERO_TOL = 1e-15

# (a, b) -> (phase, a*b) for single-qubit Pauli products
_PRODUCT = {}
for _a in "IXYZ":
    _PRODUCT[("I", _a)] = (1, _a)
    _PRODUCT[(_a, "I")] = (1, _a)
for _a in "XYZ":
    _PRODUCT[(_a, _a)] = (1, "I")
_PRODUCT[("X", "Y")] = (1j, "Z")
_PRODUCT[("Y", "X")] = (-1j, "Z")
_PRODUCT[("Y", "Z")] = (1j, "X")
_PRODUCT[("Z", "Y")] = (-1j, "X")
_PRODUCT[("Z", "X")] = (1j, "Y")
_PRODUCT[("X", "Z")] = (-1j, "Y")


def multiply_strings(a: str, b: str) -> tuple[complex, str]:
    """Return ``(phase, c)`` with ``P_a P_b = phase * P_c``."""
    phase = 1 + 0j
    out = []
    for x, y in zip(a, b):
        ph, z = _PRODUCT[(x, y)]
        phase *= ph
        out.append(z)
    return phase, "".join(out)


def string_masks(s: str) -> tuple[int, int, int]:
    """Bit masks ``(flip, sign, n_y)`` of a Pauli string.

    ``P|x> = i**n_y * (-1)**popcount(x & sign) |x ^ flip>``.
    """
    flip = sign = 0
    n_y = 0
    for q, c in enumerate(s):
        if c in "XY":
            flip |= 1 << q
        if c in "YZ":
            sign |= 1 << q
        if c == "Y":
            n_y += 1
    return flip, sign, n_y


def _popcount_parity(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    parity = np.zeros(x.shape, dtype=np.int64)
    while np.any(x):
        parity ^= x & 1
        x >>= 1
    return parity


def string_action(s: str, basis: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Rows and phases of a Pauli string acting on basis states ``basis``.

    Returns ``(rows, values)`` such that ``P|x> = values * |rows>``.
    """
    n = len(s)
    if basis is None:
        basis = np.arange(1 << n, dtype=np.int64)
    flip, sign, n_y = string_masks(s)
    parity = _popcount_parity(basis & sign)
    values = (1j ** n_y) * (1 - 2 * parity)
    return basis ^ flip, values.astype(complex)


@dataclass(frozen=True)
class PauliSum:
    """Immutable weighted sum of Pauli strings on ``n_qubits`` qubits."""

    n_qubits: int
    terms: tuple[tuple[complex, str], ...] = ()

    def __post_init__(self):
        for _, s in self.terms:
            if len(s) != self.n_qubits or set(s) - set("IXYZ"):
                raise ValueError(f"bad Pauli string {s!r} for {self.n_qubits} qubits")

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Iterable[tuple[complex, str]]) -> "PauliSum":
        return cls(n_qubits, tuple((complex(c), s) for c, s in terms)).canonical()

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls.from_terms(n_qubits, [(coeff, "I" * n_qubits)])

    @classmethod
    def single(cls, n_qubits: int, ops: dict[int, str], coeff: complex = 1.0) -> "PauliSum":
        chars = ["I"] * n_qubits
        for q, c in ops.items():
            chars[q] = c
        return cls.from_terms(n_qubits, [(coeff, "".join(chars))])

    def canonical(self) -> "PauliSum":
        """Merge duplicate strings, drop |c| < 1e-15, sort lexicographically."""
        merged: dict[str, complex] = {}
        for c, s in self.terms:
            merged[s] = merged.get(s, 0j) + c
        terms = tuple(
            (complex(merged[s]), s) for s in sorted(merged) if abs(merged[s]) >= ZERO_TOL
        )
        return PauliSum(self.n_qubits, terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        return PauliSum(self.n_qubits, self.terms + other.terms).canonical()

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "PauliSum":
        return PauliSum(self.n_qubits, tuple((scalar * c, s) for c, s in self.terms)).canonical()

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        out = []
        for ca, sa in self.terms:
            for cb, sb in other.terms:
                ph, s = multiply_strings(sa, sb)
                out.append((ph * ca * cb, s))
        return PauliSum(self.n_qubits, tuple(out)).canonical()

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n_qubits, tuple((np.conj(c), s) for c, s in self.terms)).canonical()

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c, _ in self.canonical().terms)

    def coefficient(self, s: str) -> complex:
        for c, t in self.terms:
            if t == s:
                return c
        return 0j

    def strings(self) -> list[str]:
        return [s for _, s in self.terms]

    def to_sparse(self) -> sp.csr_matrix:
        n = self.n_qubits
        dim = 1 << n
        cols = np.arange(dim, dtype=np.int64)
        rows_all, cols_all, vals_all = [], [], []
        for c, s in self.terms:
            rows, vals = string_action(s, cols)
            rows_all.append(rows)
            cols_all.append(cols)
            vals_all.append(c * vals)
        if not rows_all:
            return sp.csr_matrix((dim, dim), dtype=complex)
        mat = sp.coo_matrix(
            (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
            shape=(dim, dim),
        ).tocsr()
        mat.sum_duplicates()
        mat.eliminate_zeros()
        return mat

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def expectation(self, state: np.ndarray) -> complex:
        """``<state|P|state>`` without forming the full matrix."""
        total = 0j
        basis = np.arange(state.size, dtype=np.int64)
        for c, s in self.terms:
            rows, vals = string_action(s, basis)
            total += c * np.vdot(state[rows], vals * state)
        return total

    def to_text(self) -> str:
        """Line format ``<re> <im> <string>``, one line per term."""
        return "".join(f"{float(c.real)!r} {float(c.imag)!r} {s}\n" for c, s in self.terms)

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        terms = []
        n = None
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            re_, im_, s = line.split()
            if n is None:
                n = len(s)
            terms.append((complex(float(re_), float(im_)), s))
        if n is None:
            raise ValueError("empty PauliSum text")
        return cls.from_terms(n, terms)


def sparse_to_text(mat: sp.spmatrix) -> str:
    """Coordinate-triplet format: header ``dim nnz`` then ``row col re im`` lines."""
    coo = sp.coo_matrix(mat)
    lines = [f"{coo.shape[0]} {coo.nnz}\n"]
    order = np.lexsort((coo.col, coo.row))
    for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
        v = complex(v)
        lines.append(f"{r} {c} {v.real!r} {v.imag!r}\n")
    return "".join(lines)


def sparse_from_text(text: str) -> sp.csr_matrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    dim, nnz = (int(x) for x in lines[0].split())
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=complex)
    for i, ln in enumerate(lines[1 : nnz + 1]):
        r, c, re_, im_ = ln.split()
        rows[i], cols[i], vals[i] = int(r), int(c), complex(float(re_), float(im_))
    return sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
