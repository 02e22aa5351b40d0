"""Gaussian fermion and antifermion wave packets."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, ResourceError
from .lattice import MAX_SPARSE_SITES, annihilation_operator
from .oracle import dispersion_arrays, mode_functions, momentum_grid

FERMION = "fermion"
ANTIFERMION = "antifermion"


@dataclass(frozen=True)
class WavePacketSpec:
    species: str
    mu_k: float
    mu_n: float
    sigma_k: float

    def __post_init__(self):
        if self.species not in (FERMION, ANTIFERMION):
            raise ValueError(f"species must be {FERMION!r} or {ANTIFERMION!r}, got {self.species!r}")
        if not self.sigma_k > 0:
            raise DomainError(f"sigma_k must be positive, got {self.sigma_k}")


@dataclass(frozen=True)
class Amplitudes:
    momentum: np.ndarray
    position: np.ndarray

    def to_csv(self, which: str = "position") -> str:
        return amplitudes_to_csv(getattr(self, which))


def projector(n: int, l: int) -> int:
    """Site-parity selector: 1 when ``n`` and ``l`` share parity."""
    return (1 + (-1) ** (n + l)) // 2


def wrap_momentum(mu_k: float, n_sites: int) -> float:
    """Map ``mu_k`` into the grid window ``[k_min, k_min + pi)``; modes repeat with period pi."""
    k_min = momentum_grid(n_sites).values[0]
    wrapped = (mu_k - k_min) % math.pi + k_min
    if not math.isclose(wrapped, mu_k, abs_tol=1e-12):
        warnings.warn(f"mean momentum {mu_k} wrapped into the grid window as {wrapped}")
    return wrapped


def gaussian_momentum_amplitudes(spec: WavePacketSpec, n_sites: int) -> np.ndarray:
    """Unit-norm ``phi_k ~ exp(-i k mu_n) exp(-(k - mu_k)^2 / (4 sigma_k^2))``."""
    k = momentum_grid(n_sites).values
    mu_k = wrap_momentum(spec.mu_k, n_sites)
    phi = np.exp(-1j * k * spec.mu_n) * np.exp(-((k - mu_k) ** 2) / (4 * spec.sigma_k**2))
    norm = np.linalg.norm(phi)
    if norm == 0.0:
        raise DomainError("Gaussian envelope underflows on the momentum grid")
    return phi / norm


def mode_matrix(species: str, m: float, n_sites: int) -> np.ndarray:
    """Linear map from momentum to position amplitudes, shape ``(N, N/2)``."""
    psi, chi = mode_functions(m, n_sites)
    return psi if species == FERMION else chi.conj()


def position_amplitudes(spec: WavePacketSpec, m: float, n_sites: int) -> np.ndarray:
    return mode_matrix(spec.species, m, n_sites) @ gaussian_momentum_amplitudes(spec, n_sites)


def position_amplitudes_explicit(spec: WavePacketSpec, m: float, n_sites: int) -> np.ndarray:
    """Site-by-site double loop; slow reference for the matrix path."""
    phi = gaussian_momentum_amplitudes(spec, n_sites)
    ks = momentum_grid(n_sites).values
    w, v = dispersion_arrays(ks, m)
    out = np.zeros(n_sites, dtype=complex)
    same, other = (0, 1) if spec.species == FERMION else (1, 0)
    for n in range(n_sites):
        acc = 0j
        for i, k in enumerate(ks):
            weight = projector(n, same) + v[i] * projector(n, other)
            acc += phi[i] * math.sqrt((m + w[i]) / w[i]) * np.exp(1j * k * n) * weight
        out[n] = acc / math.sqrt(n_sites)
    return out


def build_amplitudes(spec: WavePacketSpec, m: float, n_sites: int) -> Amplitudes:
    mom = gaussian_momentum_amplitudes(spec, n_sites)
    return Amplitudes(mom, mode_matrix(spec.species, m, n_sites) @ mom)


def orthogonality_defect(phi_c: np.ndarray, phi_d: np.ndarray) -> complex:
    """Unconjugated bilinear sum ``sum_n phi_c[n] * phi_d[n]``."""
    phi_c = np.asarray(phi_c)
    phi_d = np.asarray(phi_d)
    if phi_c.shape != phi_d.shape:
        raise ValueError("amplitude vectors differ in shape")
    return complex(np.sum(phi_c * phi_d))


def packet_creation_matrix(phi: np.ndarray, species: str) -> sp.csr_matrix:
    """``sum_n phi_n xi_n^dag`` (fermion) or ``sum_n phi_n xi_n`` (antifermion)."""
    n_sites = len(phi)
    if n_sites > MAX_SPARSE_SITES:
        raise ResourceError(f"{n_sites} sites exceeds the sparse limit of {MAX_SPARSE_SITES}")
    dim = 1 << n_sites
    out = sp.csr_matrix((dim, dim), dtype=complex)
    for n, amp in enumerate(phi):
        if amp == 0:
            continue
        xi = annihilation_operator(n_sites, n)
        out = out + amp * (xi.conj().T if species == FERMION else xi)
    return out.tocsr()


def amplitudes_to_csv(vec: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "re", "im"])
    for i, z in enumerate(np.asarray(vec, dtype=complex)):
        writer.writerow([i, repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue()


def amplitudes_from_csv(text: str) -> np.ndarray:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = np.zeros(len(rows), dtype=complex)
    for row in rows:
        out[int(row["index"])] = complex(float(row["re"]), float(row["im"]))
    return out
