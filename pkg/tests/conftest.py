from __future__ import annotations

import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from thirring.lattice import ModelParams, build_fermionic_hamiltonian, number_sector_basis
from thirring.statevector import DensePropagator, ground_state_exact
from thirring.wavepacket import ANTIFERMION, FERMION, WavePacketSpec, position_amplitudes

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.register_profile("thorough", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def packet_specs(n: int, mu_c: float, mu_d: float, modes: float = 1.0, width: float = 1.0):
    unit = 2 * math.pi / n
    return (
        WavePacketSpec(FERMION, modes * unit, mu_c, width * unit),
        WavePacketSpec(ANTIFERMION, -modes * unit, mu_d, width * unit),
    )


def packet_pair(n: int, m: float, mu_c: float, mu_d: float, modes: float = 1.0, width: float = 1.0):
    sc, sd = packet_specs(n, mu_c, mu_d, modes, width)
    return position_amplitudes(sc, m, n), position_amplitudes(sd, m, n)


def free_vacuum(n: int, m: float = 1.0, g: float = 0.0):
    h = build_fermionic_hamiltonian(ModelParams(n, m, g))
    energy, vac = ground_state_exact(h, number_sector_basis(n, n // 2))
    return h, energy, vac


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return psi / np.linalg.norm(psi)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


class Scattering14:
    """Pair, single-packet and vacuum trajectories at N=14, m=0.8 for one coupling."""

    n = 14
    mass = 0.8
    times = np.arange(0.0, 30.0 + 1e-9, 1.0)

    def __init__(self, g: float):
        from thirring.wavepacket import packet_creation_matrix

        self.g = g
        self.h = build_fermionic_hamiltonian(ModelParams(self.n, self.mass, g))
        self.prop = DensePropagator(self.h, self.n)
        _, self.vacuum = self.prop.ground_state(self.n // 2)
        pc, pd = packet_pair(self.n, self.mass, 2, 11)
        self.c = packet_creation_matrix(pc, FERMION)
        self.d = packet_creation_matrix(pd, ANTIFERMION)
        self._cache: dict[str, np.ndarray] = {}

    def trajectory(self, which: str) -> np.ndarray:
        if which not in self._cache:
            vac = self.vacuum
            start = {"pair": self.d @ (self.c @ vac), "c": self.c @ vac, "d": self.d @ vac}[which]
            start = start / np.linalg.norm(start)
            self._cache[which] = self.prop.evolve(start, self.times)
        return self._cache[which]


@pytest.fixture(scope="session")
def scattering14():
    cache: dict[float, Scattering14] = {}

    def get(g: float) -> Scattering14:
        if g not in cache:
            cache[g] = Scattering14(g)
        return cache[g]

    return get


# -- acceptance report -------------------------------------------------------------

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


class criterion:
    """Records PASS/FAIL for one acceptance criterion; assertion errors propagate."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        if exc is not None:
            self.details.append(str(exc).splitlines()[0] if str(exc) else exc_type.__name__)
        ACCEPTANCE[self.number] = (self.title, ok, "; ".join(self.details))
        return False


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{num:2d}] {title}: {detail}")
