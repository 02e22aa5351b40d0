from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thirring.pauli import PauliSum, multiply_strings, sparse_from_text, sparse_to_text

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0 + 0j, -1.0])
MATS = {"I": np.eye(2), "X": X, "Y": Y, "Z": Z}


def kron_string(s: str) -> np.ndarray:
    # character q acts on qubit q, which is bit q of the index
    out = np.eye(1)
    for c in s:
        out = np.kron(MATS[c], out)
    return out


strings = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


@given(strings)
def test_single_string_matches_kron_product(s):
    dense = PauliSum.from_terms(len(s), [(1.0, s)]).to_dense()
    np.testing.assert_allclose(dense, kron_string(s), atol=1e-15)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(*[st.text("IXYZ", min_size=n, max_size=n)] * 2)))
def test_string_product_phase(pair):
    a, b = pair
    phase, c = multiply_strings(a, b)
    np.testing.assert_allclose(kron_string(a) @ kron_string(b), phase * kron_string(c), atol=1e-14)


def test_x_on_first_character_flips_lowest_bit():
    m = PauliSum.from_terms(2, [(1.0, "XI")]).to_dense()
    assert m[1, 0] == 1 and m[2, 0] == 0


def test_canonical_merges_and_drops_zeros():
    p = PauliSum.from_terms(2, [(1.0, "ZI"), (0.5, "IX"), (-1.0, "ZI"), (0.25, "IX")])
    assert p.terms == ((0.75 + 0j, "IX"),)
    assert PauliSum.from_terms(1, [(1e-16, "Z")]).terms == ()


def test_lexicographic_order():
    p = PauliSum.from_terms(2, [(1, "ZZ"), (1, "XI"), (1, "IY")])
    assert p.strings() == sorted(p.strings())


def test_matmul_matches_dense(rng):
    a = PauliSum.from_terms(3, [(rng.normal(), "XYZ"), (1j, "ZII"), (0.3, "IXX")])
    b = PauliSum.from_terms(3, [(0.7, "YYI"), (-2.0, "IIZ")])
    np.testing.assert_allclose((a @ b).to_dense(), a.to_dense() @ b.to_dense(), atol=1e-13)


def test_adjoint_and_hermiticity():
    p = PauliSum.from_terms(2, [(1j, "XY"), (2.0, "ZI")])
    assert not p.is_hermitian()
    assert (p + p.adjoint()).is_hermitian()


def test_expectation_without_matrix(rng):
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    p = PauliSum.from_terms(4, [(0.4, "XYZI"), (1.1, "ZZII"), (-0.2j, "IYIX")])
    assert p.expectation(psi) == pytest.approx(np.vdot(psi, p.to_dense() @ psi), abs=1e-13)


def test_text_round_trip():
    p = PauliSum.from_terms(3, [(0.1 + 0.2j, "XYZ"), (-3.0, "IIZ")])
    assert PauliSum.from_text(p.to_text()) == p


def test_sparse_text_round_trip(rng):
    p = PauliSum.from_terms(3, [(rng.normal(), "XYZ"), (0.5j, "ZIX")]).to_sparse()
    back = sparse_from_text(sparse_to_text(p))
    assert abs(back - p).max() == 0.0


def test_rejects_bad_strings():
    with pytest.raises(ValueError):
        PauliSum.from_terms(2, [(1.0, "XQ")])
    with pytest.raises(ValueError):
        PauliSum.from_terms(2, [(1.0, "XYZ")])
