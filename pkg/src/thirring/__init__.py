"""Wave-packet scattering in the lattice Thirring model, simulated on qubits."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    NumericalHealthError,
    ResourceError,
    ValidationError,
)
from .kernels import BACKEND
from .lattice import ModelParams, build_fermionic_hamiltonian, build_pauli_hamiltonian
from .oracle import dispersion, momentum_grid, oracle_density_series
from .pauli import PauliSum
from .wavepacket import ANTIFERMION, FERMION, WavePacketSpec, build_amplitudes

__all__ = [
    "__version__",
    "BACKEND",
    "ConfigurationError",
    "ConvergenceError",
    "DomainError",
    "NumericalHealthError",
    "ResourceError",
    "ValidationError",
    "ModelParams",
    "build_fermionic_hamiltonian",
    "build_pauli_hamiltonian",
    "dispersion",
    "momentum_grid",
    "oracle_density_series",
    "PauliSum",
    "FERMION",
    "ANTIFERMION",
    "WavePacketSpec",
    "build_amplitudes",
]
