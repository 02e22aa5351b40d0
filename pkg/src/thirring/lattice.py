"""Staggered lattice Thirring Hamiltonian in Pauli and fermionic form.

Conventions used throughout the package:

* site ``n`` is qubit ``n``; bit ``n`` of a basis index is the occupation of site ``n``
* ``xi_n^dag = prod_{l<n} Z_l sigma^-_n`` with ``sigma^- = |1><0|``
* occupation ``n_n = (1 - Z_n) / 2``
* lattice spacing ``a = 1`` and periodic boundary ``xi_N == xi_0``
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, DomainError, ResourceError
from .pauli import PauliSum

MAX_SPARSE_SITES = 22


@dataclass(frozen=True)
class ModelParams:
    """Physical configuration. ``lam`` (if given) fixes ``coupling_g``."""

    n_sites: int
    mass: float = 1.0
    coupling_g: float = 0.0
    lam: Optional[float] = None
    boundary: str = "periodic"

    def __post_init__(self):
        if not isinstance(self.n_sites, (int, np.integer)) or self.n_sites <= 0:
            raise ConfigurationError(f"n_sites must be a positive integer, got {self.n_sites!r}")
        if self.n_sites % 2:
            raise ConfigurationError(f"n_sites must be even, got {self.n_sites}")
        if self.boundary != "periodic":
            raise ConfigurationError("only periodic boundary conditions are supported")
        if self.lam is not None:
            g = coupling_from_lambda(self.lam)
            if self.coupling_g not in (0.0, g) and not math.isclose(self.coupling_g, g, abs_tol=1e-14):
                raise ConfigurationError(
                    f"coupling_g={self.coupling_g} inconsistent with lam={self.lam} (g={g})"
                )
            object.__setattr__(self, "coupling_g", g)
        if not -1.0 <= self.coupling_g <= 1.0:
            raise ConfigurationError(f"coupling_g must lie in [-1, 1], got {self.coupling_g}")

    @property
    def dim(self) -> int:
        return 1 << self.n_sites


def coupling_from_lambda(lam: float) -> float:
    """``g = cos((pi - lam) / 2)`` for ``lam`` in ``(-pi, pi]``."""
    if not (-math.pi < lam <= math.pi):
        raise DomainError(f"lambda must lie in (-pi, pi], got {lam}")
    return math.cos((math.pi - lam) / 2)


def _sigma(n_qubits: int, q: int, kind: str) -> PauliSum:
    # sigma^- = (X - iY)/2 raises occupation, sigma^+ = (X + iY)/2 lowers it
    sign = -0.5j if kind == "-" else 0.5j
    return PauliSum.single(n_qubits, {q: "X"}, 0.5) + PauliSum.single(n_qubits, {q: "Y"}, sign)


def _number(n_qubits: int, q: int) -> PauliSum:
    return PauliSum.identity(n_qubits, 0.5) + PauliSum.single(n_qubits, {q: "Z"}, -0.5)


def build_pauli_hamiltonian(params: ModelParams) -> PauliSum:
    """Spin form of the lattice Hamiltonian, identity terms kept."""
    n = params.n_sites
    m, g = params.mass, params.coupling_g
    h = PauliSum(n)
    for site in range(n - 1):
        fwd = _sigma(n, site + 1, "-") @ _sigma(n, site, "+")
        h = h + 0.5j * (fwd - fwd.adjoint())
    # wrap-around hopping carries the Z string on sites 1..N-2
    string = PauliSum.single(n, {q: "Z" for q in range(1, n - 1)})
    wrap = _sigma(n, 0, "-") @ string @ _sigma(n, n - 1, "+")
    h = h + 0.5j * (wrap - wrap.adjoint())
    for site in range(n):
        h = h + ((-1) ** site * m) * _number(n, site)
    if g != 0.0:
        for site in range(n):
            h = h + g * (_number(n, site) @ _number(n, (site + 1) % n))
    return h


def _check_size(n_sites: int) -> None:
    if n_sites > MAX_SPARSE_SITES:
        raise ResourceError(f"{n_sites} sites exceeds the sparse limit of {MAX_SPARSE_SITES}")


def annihilation_operator(n_sites: int, site: int) -> sp.csr_matrix:
    """Sparse ``xi_site`` with the Jordan-Wigner sign applied per basis state."""
    _check_size(n_sites)
    if not 0 <= site < n_sites:
        raise IndexError(f"site {site} outside 0..{n_sites - 1}")
    dim = 1 << n_sites
    basis = np.arange(dim, dtype=np.int64)
    occupied = (basis >> site) & 1 == 1
    cols = basis[occupied]
    rows = cols ^ (1 << site)
    below = cols & ((1 << site) - 1)
    signs = 1.0 - 2.0 * (popcount(below) & 1)
    return sp.csr_matrix((signs.astype(complex), (rows, cols)), shape=(dim, dim))


def popcount(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64).copy()
    count = np.zeros_like(x)
    while np.any(x):
        count += x & 1
        x >>= 1
    return count


def build_fermionic_hamiltonian(params: ModelParams) -> sp.csr_matrix:
    """Hamiltonian assembled from sparse ladder-operator products."""
    n = params.n_sites
    _check_size(n)
    xi = [annihilation_operator(n, s) for s in range(n)]
    xid = [op.conj().T.tocsr() for op in xi]
    dens = [xid[s] @ xi[s] for s in range(n)]
    dim = 1 << n
    h = sp.csr_matrix((dim, dim), dtype=complex)
    for s in range(n):
        nxt = (s + 1) % n
        h = h + 0.5j * (xid[nxt] @ xi[s] - xid[s] @ xi[nxt])
        h = h + ((-1) ** s * params.mass) * dens[s]
        if params.coupling_g != 0.0:
            h = h + params.coupling_g * (dens[s] @ dens[nxt])
    h.sum_duplicates()
    h.eliminate_zeros()
    return h.tocsr()


def number_diagonal(n_sites: int) -> np.ndarray:
    """Total particle number of every basis state."""
    return popcount(np.arange(1 << n_sites, dtype=np.int64))


def total_z_diagonal(n_sites: int) -> np.ndarray:
    """``sum_n sigma^z_n`` of every basis state."""
    return n_sites - 2 * number_diagonal(n_sites)


def site_occupation(n_sites: int, site: int) -> np.ndarray:
    return ((np.arange(1 << n_sites, dtype=np.int64) >> site) & 1).astype(float)


def charge_sector_basis(n_sites: int, total_z: int) -> np.ndarray:
    """Sorted basis indices whose ``sum sigma^z`` equals ``total_z`` (may be empty)."""
    if abs(total_z) > n_sites or (n_sites - total_z) % 2:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(total_z_diagonal(n_sites) == total_z).astype(np.int64)


def number_sector_basis(n_sites: int, n_particles: int) -> np.ndarray:
    return charge_sector_basis(n_sites, n_sites - 2 * n_particles)
