from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from thirring.errors import ConfigurationError, DomainError, ResourceError
from thirring.lattice import (
    ModelParams,
    annihilation_operator,
    build_fermionic_hamiltonian,
    build_pauli_hamiltonian,
    charge_sector_basis,
    coupling_from_lambda,
    number_sector_basis,
    total_z_diagonal,
)
from thirring.oracle import vacuum_energy
from thirring.statevector import ground_state_exact


def dense(h):
    return h.toarray() if sp.issparse(h) else h.to_dense()


@pytest.mark.parametrize(
    "lam, g", [(math.pi, 1.0), (0.0, 0.0), (math.pi / 2, math.sqrt(2) / 2)]
)
def test_coupling_from_lambda(lam, g):
    assert coupling_from_lambda(lam) == pytest.approx(g, abs=1e-15)


@pytest.mark.parametrize("lam", [-math.pi, 3.5, -4.0])
def test_coupling_from_lambda_range(lam):
    with pytest.raises(DomainError):
        coupling_from_lambda(lam)


def test_params_lambda_sets_coupling():
    p = ModelParams(4, lam=math.pi / 2)
    assert p.coupling_g == pytest.approx(math.cos(math.pi / 4), abs=1e-15)
    with pytest.raises(ConfigurationError):
        ModelParams(4, coupling_g=0.3, lam=math.pi / 2)


@pytest.mark.parametrize("n", [0, 3, 5, -2])
def test_params_reject_bad_size(n):
    with pytest.raises(ConfigurationError):
        ModelParams(n)


def test_pauli_trace_massless_free():
    assert np.trace(dense(build_pauli_hamiltonian(ModelParams(4, 0.0, 0.0)))) == pytest.approx(0, abs=1e-12)


def test_pauli_trace_interacting():
    # only the identity piece of the density-density term survives
    tr = np.trace(dense(build_pauli_hamiltonian(ModelParams(4, 1.0, 0.8))))
    assert tr.real == pytest.approx(12.8, abs=1e-12)


def test_wrap_term_carries_z_string():
    h = build_pauli_hamiltonian(ModelParams(6, 0.0, 0.0))
    wrap = [s for s in h.strings() if s[0] in "XY" and s[-1] in "XY"]
    assert wrap and all(s[1:-1] == "ZZZZ" for s in wrap)


def test_free_pauli_form_has_no_interaction_terms():
    h = build_pauli_hamiltonian(ModelParams(6, 1.0, 0.0))
    zz = [s for s in h.strings() if s.count("Z") == 2 and set(s) <= {"I", "Z"}]
    assert zz == []


def test_hamiltonian_strings_unique_after_canonicalization():
    h = build_pauli_hamiltonian(ModelParams(6, 0.7, 0.3))
    assert len(h.strings()) == len(set(h.strings()))


def test_anticommutators_n4():
    n = 4
    xi = [annihilation_operator(n, s) for s in range(n)]
    eye = np.eye(1 << n)
    for a in range(n):
        for b in range(n):
            anti = (xi[a].conj().T @ xi[b] + xi[b] @ xi[a].conj().T).toarray()
            np.testing.assert_allclose(anti, eye * (a == b), atol=1e-15)
            np.testing.assert_allclose((xi[a] @ xi[b] + xi[b] @ xi[a]).toarray(), 0, atol=1e-15)


@given(
    st.sampled_from([2, 4, 6]),
    st.floats(0.0, 2.0),
    st.floats(-1.0, 1.0),
)
def test_dual_construction_small(n, m, g):
    a = dense(build_fermionic_hamiltonian(ModelParams(n, m, g)))
    b = dense(build_pauli_hamiltonian(ModelParams(n, m, g)))
    assert np.abs(a - b).max() < 1e-12
    assert np.abs(a - a.conj().T).max() < 1e-12


def test_vacuum_energy_matches_momentum_sum():
    h = build_fermionic_hamiltonian(ModelParams(6, 1.0, 0.0))
    energy, _ = ground_state_exact(h)
    assert energy == pytest.approx(vacuum_energy(1.0, 6), abs=1e-10)


def test_sector_enumeration():
    assert list(charge_sector_basis(2, 0)) == [1, 2]
    assert len(charge_sector_basis(4, 0)) == 6
    assert charge_sector_basis(4, 1).size == 0
    assert charge_sector_basis(4, 6).size == 0
    assert np.array_equal(number_sector_basis(6, 3), charge_sector_basis(6, 0))


def test_ground_state_in_neutral_sector():
    n = 8
    h = build_fermionic_hamiltonian(ModelParams(n, 1.0, 0.2))
    _, psi = ground_state_exact(h)
    outside = np.setdiff1d(np.arange(1 << n), charge_sector_basis(n, 0))
    assert np.linalg.norm(psi[outside]) < 1e-10


def test_size_limit():
    with pytest.raises(ResourceError):
        annihilation_operator(30, 0)
    with pytest.raises(IndexError):
        annihilation_operator(4, 4)


def test_charge_commutes_for_n8():
    n = 8
    q = sp.diags(total_z_diagonal(n).astype(float))
    for m, g in [(1.0, 0.0), (0.5, 0.8), (1.0, -0.8)]:
        h = build_fermionic_hamiltonian(ModelParams(n, m, g))
        assert abs(h @ q - q @ h).max() == 0.0
