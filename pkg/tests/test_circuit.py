from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_state
from thirring.circuit import (
    Gate,
    GateProgram,
    cnot_depth,
    givens_depth,
    giv,
    layer_table,
    lightcone_prune,
    marker,
    ring_giv,
    rz,
    schedule_layers,
)
from thirring.givens import givens_gate_matrix
from thirring.lattice import annihilation_operator
from thirring.statevector import apply_program, program_matrix


def random_program(n: int, count: int, seed: int) -> GateProgram:
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(count):
        if rng.random() < 0.6:
            gates.append(giv(int(rng.integers(0, n - 1)), float(rng.uniform(-math.pi, math.pi))))
        else:
            gates.append(rz(int(rng.integers(0, n)), float(rng.uniform(-math.pi, math.pi))))
    return GateProgram(n, tuple(gates))


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("GIV", (0, 2), 0.1)
    with pytest.raises(ValueError):
        Gate("RZ", (0, 1), 0.1)
    with pytest.raises(IndexError):
        GateProgram(3, (giv(2, 0.1),))
    with pytest.raises(ValueError):
        GateProgram(6, (Gate("GIV", (4, 0), 0.1),))


def test_text_round_trip():
    prog = GateProgram(
        4, (giv(0, 0.25), rz(3, -1.5), marker("PX", 0), Gate("BARRIER"), marker("SP", 2), ring_giv(4, 0.7))
    )
    text = prog.to_text()
    assert "GIV 0 1 0.25" in text and "BARRIER" in text
    assert GateProgram.from_text(text) == prog


def test_inverse_pair_is_identity(rng):
    prog = GateProgram(4, (giv(1, 0.37), giv(1, -0.37)))
    psi = random_state(4, rng)
    assert np.abs(apply_program(psi, prog) - psi).max() < 1e-14


def test_program_inverse(rng):
    prog = random_program(5, 30, 3)
    np.testing.assert_allclose(program_matrix(prog) @ program_matrix(prog.inverse()), np.eye(32), atol=1e-12)


@pytest.mark.parametrize("n", [4, 6])
def test_layered_program_same_unitary(n):
    prog = random_program(n, 50, n)
    sched = schedule_layers(prog)
    assert np.abs(program_matrix(prog) - program_matrix(sched)).max() < 1e-12


def test_layers_pack_disjoint_pairs():
    prog = GateProgram(6, tuple(giv(q, 0.1) for q in (0, 2, 4, 1, 3)))
    table = layer_table(prog)
    assert [len(layer) for layer in table] == [3, 2]
    assert givens_depth(prog) == 2 and cnot_depth(prog) == 4


def test_chain_has_no_parallelism():
    n = 8
    chain = GateProgram(n, tuple(giv(q, 0.3) for q in range(n - 1)))
    assert givens_depth(chain) == n - 1


def test_phases_fuse():
    prog = GateProgram(3, (rz(1, 0.2), rz(1, 0.3), giv(0, 0.1)))
    sched = schedule_layers(prog)
    assert sched.count("RZ") == 1
    assert sched.gates[0].param == pytest.approx(0.5)


def test_barrier_separates_layers():
    prog = GateProgram(4, (giv(0, 0.1), Gate("BARRIER"), giv(2, 0.1)))
    assert givens_depth(prog) == 2


@given(st.integers(0, 10_000))
def test_prune_keeps_single_site_expectation(seed):
    n = 6
    prog = random_program(n, 40, seed)
    psi = random_state(n, np.random.default_rng(seed))
    z = 1.0 - 2.0 * ((np.arange(1 << n) >> 2) & 1)
    full = np.vdot(apply_program(psi, prog), z * apply_program(psi, prog)).real
    pruned = lightcone_prune(prog, 2)
    part = np.vdot(apply_program(psi, pruned), z * apply_program(psi, pruned)).real
    assert abs(full - part) < 1e-12
    assert len(pruned) <= len(prog)


def test_prune_drops_disconnected_gates():
    prog = GateProgram(6, (giv(4, 0.3), giv(0, 0.2), rz(5, 1.0)))
    pruned = lightcone_prune(prog, 0)
    assert pruned.gates == (giv(0, 0.2),)


def test_prune_refuses_non_unitary():
    with pytest.raises(ValueError):
        lightcone_prune(GateProgram(2, (marker("SP", 0),)), 0)


def test_mirror_reflects_unitary():
    n = 4
    prog = random_program(n, 20, 11)
    perm = np.zeros((1 << n, 1 << n))
    for x in range(1 << n):
        y = int(format(x, f"0{n}b")[::-1], 2)
        perm[y, x] = 1
    # adjacent hops are reflection symmetric up to the sign absorbed in -theta
    np.testing.assert_allclose(program_matrix(prog.mirrored()), perm @ program_matrix(prog) @ perm, atol=1e-12)


def test_ring_gate_matches_wrap_hop_at_fixed_parity():
    n = 4
    theta = 0.83
    u = program_matrix(GateProgram(n, (ring_giv(n, theta),)))
    xi = [annihilation_operator(n, s).toarray() for s in range(n)]
    hop = xi[n - 1].conj().T @ xi[0] - xi[0].conj().T @ xi[n - 1]
    import scipy.linalg as sla

    ref = sla.expm(theta * hop)
    # on the half-filled sector the two differ only by a fixed sign of theta
    idx = [x for x in range(1 << n) if bin(x).count("1") == n // 2]
    a = u[np.ix_(idx, idx)]
    b_plus, b_minus = ref[np.ix_(idx, idx)], sla.expm(-theta * hop)[np.ix_(idx, idx)]
    assert min(np.abs(a - b_plus).max(), np.abs(a - b_minus).max()) < 1e-12


def test_ring_gate_is_givens_with_top_qubit_as_lower_role():
    n, theta = 4, 0.4
    m = program_matrix(GateProgram(n, (ring_giv(n, theta),)))
    g = givens_gate_matrix(theta)
    ref = np.zeros((1 << n, 1 << n), dtype=complex)
    for x in range(1 << n):
        local = ((x >> (n - 1)) & 1) + 2 * (x & 1)
        rest = x & ~((1 << (n - 1)) | 1)
        for out in range(4):
            y = rest | ((out & 1) << (n - 1)) | (out >> 1)
            ref[y, x] = g[out, local]
    np.testing.assert_allclose(m, ref, atol=1e-15)


def test_markers_and_unitarity():
    prog = GateProgram(3, (marker("PX", 0), marker("SM", 1)))
    assert not prog.is_unitary
    assert prog.without_markers().gates == ()
    assert prog.count("PX") == 1
