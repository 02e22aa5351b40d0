from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from conftest import free_vacuum, packet_pair, random_state, random_unitary
from thirring.circuit import cnot_depth, lightcone_prune, schedule_layers
from thirring.errors import ValidationError
from thirring.givens import (
    compress_product,
    decompose_columns,
    decompose_isometry,
    entangler_count,
    expansion_matrix,
    free_evolution_matrix,
    givens_angle,
    givens_cnot_expansion,
    givens_gate_matrix,
    givens_generator,
    is_number_conserving,
    program_v_dagger_of,
    program_v_of,
    synthesize_scattering_program,
    synthesize_state_prep,
    synthesize_unitary,
)
from thirring.lattice import ModelParams, build_fermionic_hamiltonian, number_diagonal
from thirring.statevector import (
    apply_program,
    basis_state,
    dense_mode_unitary,
    evolve_dense,
    fidelity,
    program_matrix,
)
from thirring.wavepacket import ANTIFERMION, FERMION, packet_creation_matrix


def unitary_with_first_column(col: np.ndarray) -> np.ndarray:
    n = len(col)
    q, _ = np.linalg.qr(np.column_stack([col, np.eye(n)[:, 1:]]))
    return q * (col[np.argmax(np.abs(col))] / q[np.argmax(np.abs(col)), 0])


def replay(u: np.ndarray, k: int) -> np.ndarray:
    return decompose_columns(u, k).matrix() @ u


# -- decomposition -------------------------------------------------------------


def test_identity_decomposes_to_nothing():
    dec = decompose_columns(np.eye(5), 5)
    assert all(s.theta == 0 for s in dec.steps)
    assert all(np.all(p.phases == 0) for p in dec.phases)


def test_single_angle_minus_quarter_turn():
    col = np.array([1, 1, 0, 0]) / math.sqrt(2)
    dec = decompose_columns(unitary_with_first_column(col), 1)
    nonzero = [s for s in dec.steps if s.theta != 0]
    assert len(nonzero) == 1
    assert nonzero[0].row == 1 and nonzero[0].theta == pytest.approx(-math.pi / 4)


def test_zero_pivot_quarter_turn():
    assert givens_angle(0.0, 1.0) == -math.pi / 2
    assert givens_angle(0.0, 0.0) == 0.0
    assert givens_angle(1.0, 0.0) == 0.0
    dec = decompose_columns(unitary_with_first_column(np.array([0, 1.0, 0, 0])), 1)
    assert {s.row: s.theta for s in dec.steps}[1] == -math.pi / 2


def test_zero_pivot_chain():
    u = unitary_with_first_column(np.array([0, 0, 1.0, 0]))
    dec = decompose_columns(u, 1)
    angles = {s.row: s.theta for s in dec.steps}
    assert angles[3] == 0 and angles[2] == -math.pi / 2 and angles[1] == -math.pi / 2
    np.testing.assert_allclose(replay(u, 1)[:, 0], np.eye(4)[:, 0], atol=1e-12)


@given(st.integers(0, 10_000), st.integers(1, 8))
def test_replay_clears_columns(seed, k):
    u = random_unitary(8, np.random.default_rng(seed))
    out = replay(u, k)
    np.testing.assert_allclose(out[:, :k], np.eye(8)[:, :k], atol=1e-10)


def test_rejects_non_unitary():
    with pytest.raises(ValidationError):
        decompose_columns(np.ones((3, 3)), 1)
    with pytest.raises(ValidationError):
        decompose_isometry(np.ones((4, 2)))


# -- many-body unitaries ---------------------------------------------------------


@pytest.mark.parametrize("orientation", ["forward", "inverted"])
def test_synthesized_unitary_equals_dense(orientation, rng):
    u = random_unitary(4, rng)
    diff = program_matrix(synthesize_unitary(u, orientation)) - dense_mode_unitary(u)
    assert np.abs(diff).max() < 1e-10


@given(st.integers(0, 10_000))
def test_homomorphism(seed):
    r = np.random.default_rng(seed)
    u, w = random_unitary(4, r), random_unitary(4, r)
    lhs = program_matrix(synthesize_unitary(u @ w))
    rhs = program_matrix(synthesize_unitary(u)) @ program_matrix(synthesize_unitary(w))
    assert np.abs(lhs - rhs).max() < 1e-10


@given(st.integers(0, 10_000))
def test_programs_preserve_particle_number(seed):
    n = 6
    r = np.random.default_rng(seed)
    prog = synthesize_unitary(random_unitary(n, r))
    assert is_number_conserving(prog)
    numbers = number_diagonal(n)
    psi = np.where(numbers == 2, random_state(n, r), 0)
    out = apply_program(psi, prog)
    assert np.linalg.norm(out[numbers != 2]) < 1e-12


def test_v_and_v_dagger_are_inverse(rng):
    dec = decompose_isometry(random_unitary(6, rng)[:, :2])
    prod = program_matrix(program_v_of(dec)) @ program_matrix(program_v_dagger_of(dec))
    np.testing.assert_allclose(prod, np.eye(64), atol=1e-12)


# -- free evolution ----------------------------------------------------------------


def test_free_evolution_identity_and_unitarity():
    np.testing.assert_allclose(free_evolution_matrix(1.0, 0.0, 6).u_t, np.eye(6), atol=1e-15)
    for m, t in [(0.5, 1.3), (1.0, 7.0), (2.0, 30.0)]:
        u = free_evolution_matrix(m, t, 8).u_t
        np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)


def test_generator_corners_and_diagonal():
    m_mat = free_evolution_matrix(1.0, 1.0, 6).m_matrix
    assert m_mat[0, 5] == pytest.approx(0.5) and m_mat[5, 0] == pytest.approx(-0.5)
    np.testing.assert_allclose(np.diag(m_mat), -1j * np.array([1, -1] * 3))
    np.testing.assert_allclose(sla.expm(m_mat), free_evolution_matrix(1.0, 1.0, 6).u_t, atol=1e-12)


def test_evolution_circuit_matches_dense_on_fock_state():
    n, m, t = 6, 1.0, 0.7
    h = build_fermionic_hamiltonian(ModelParams(n, m, 0.0))
    psi = basis_state(n, 0b010110)
    circ = apply_program(psi, synthesize_unitary(free_evolution_matrix(m, t, n).u_t))
    assert fidelity(circ, evolve_dense(h, psi, t)) >= 1 - 1e-10


def test_compress_product_identity_evolution(rng):
    dec = decompose_isometry(random_unitary(5, rng)[:, :2])
    np.testing.assert_allclose(compress_product(np.eye(5), dec), dec.matrix().conj().T, atol=1e-14)


# -- state preparation ------------------------------------------------------------


@pytest.fixture(scope="module")
def six_site():
    n, m = 6, 1.0
    h, _, vac = free_vacuum(n, m)
    pc, pd = packet_pair(n, m, 1, 4)
    ref = packet_creation_matrix(pd, ANTIFERMION) @ (packet_creation_matrix(pc, FERMION) @ vac)
    return h, vac, pc, pd, ref


@pytest.mark.parametrize("method", ["ucd", "chain"])
@pytest.mark.parametrize("unitary", [False, True])
def test_state_prep_matches_ladder_oracle(six_site, method, unitary):
    _, vac, pc, pd, ref = six_site
    prep = synthesize_state_prep([(FERMION, pc), (ANTIFERMION, pd)], unitary_excitations=unitary, method=method)
    assert prep.method == method
    assert fidelity(apply_program(vac, prep.program), ref) >= 1 - 1e-10


def test_single_fermion_prep_n4():
    _, _, vac = free_vacuum(4)
    pc, _ = packet_pair(4, 1.0, 0, 3, modes=0.0)
    prep = synthesize_state_prep([(FERMION, pc)])
    ref = packet_creation_matrix(pc, FERMION) @ vac
    assert fidelity(apply_program(vac, prep.program), ref) >= 1 - 1e-10


def test_same_species_falls_back_with_warning(six_site):
    _, vac, pc, _, _ = six_site
    with pytest.warns(UserWarning):
        prep = synthesize_state_prep([(FERMION, pc), (FERMION, np.roll(pc, 2))], method="ucd")
    assert prep.method == "chain"


@pytest.mark.parametrize("orientation", ["forward", "inverted"])
def test_scattering_circuit_matches_dense_path(six_site, orientation):
    h, vac, pc, pd, ref = six_site
    for t in (0.0, 0.7, 3.1):
        prog = synthesize_scattering_program(pc, pd, 1.0, t, orientation)
        assert fidelity(apply_program(vac, prog), evolve_dense(h, ref, t)) >= 1 - 1e-10


# -- depth accounting ---------------------------------------------------------------


@pytest.mark.parametrize("n", [6, 8, 10, 12])
def test_depth_and_count_bounds(n):
    prog = synthesize_unitary(free_evolution_matrix(1.0, 1.3, n).u_t)
    assert cnot_depth(schedule_layers(prog)) <= 4 * n
    assert prog.count("GIV") <= n * (n - 1)


def test_pruned_depths_n12():
    n, m = 12, 1.0
    pc, pd = packet_pair(n, m, 2, 9)
    fwd = synthesize_scattering_program(pc, pd, m, 1.3)
    inv = synthesize_scattering_program(pc, pd, m, 1.3, "inverted")
    forward = [cnot_depth(lightcone_prune(fwd, q)) for q in range(n)]
    inverted = [cnot_depth(lightcone_prune(inv, q)) for q in range(n)]
    assert forward[0] == 30
    assert all(b - a == 2 for a, b in zip(forward[: n - 2], forward[1 : n - 1]))
    assert inverted[n - 1] == 30
    assert inverted == forward[::-1]


def test_prune_expectation_n8():
    n, m = 8, 1.0
    _, _, vac = free_vacuum(n, m)
    pc, pd = packet_pair(n, m, 1, 6)
    prog = synthesize_scattering_program(pc, pd, m, 2.2)
    full = apply_program(vac, prog)
    for q in range(n):
        z = 1.0 - 2.0 * ((np.arange(1 << n) >> q) & 1)
        part = apply_program(vac, lightcone_prune(prog, q))
        assert abs(np.vdot(full, z * full) - np.vdot(part, z * part)) < 1e-12


# -- the two-qubit gate ---------------------------------------------------------------


def test_gate_at_zero_is_identity():
    np.testing.assert_array_equal(givens_gate_matrix(0.0), np.eye(4))


def test_quarter_turn_exchanges_middle_states():
    g = givens_gate_matrix(math.pi / 2)
    assert abs(g[2, 1]) == pytest.approx(1) and abs(g[1, 2]) == pytest.approx(1)
    assert g[0, 0] == 1 and g[3, 3] == 1


def test_half_turn_flips_sign_of_middle_block():
    g = givens_gate_matrix(math.pi)
    np.testing.assert_allclose(g, np.diag([1, -1, -1, 1]), atol=1e-15)


@given(st.floats(-2 * math.pi, 2 * math.pi))
def test_gate_properties(theta):
    g = givens_gate_matrix(theta)
    np.testing.assert_allclose(g, sla.expm(1j * theta * givens_generator()), atol=1e-12)
    mask = np.ones((4, 4), dtype=bool)
    mask[0, 0] = mask[3, 3] = False
    mask[1:3, 1:3] = False
    assert np.all(g[mask] == 0)
    entries = givens_cnot_expansion(theta)
    assert entangler_count(entries) == 2
    assert np.abs(expansion_matrix(entries) - g).max() < 1e-12
