"""Column-by-column Givens decomposition of single-particle unitaries and circuit synthesis.

A single-particle unitary ``u`` induces the many-body unitary ``V(u)`` with
``V(u) xi_n^dag V(u)^dag = sum_m xi_m^dag u_mn``. Rotations ``r_{n,l}(t)`` mix
rows ``n-1`` and ``n``::

    [[cos t, -sin t],
     [sin t,  cos t]]

and ``V(r_n(t)^dag)`` is the gate ``GIV n-1 n t``. Phase matrices
``p = diag(e^{i b})`` give ``V(p) = prod RZ(b)``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import Gate, GateProgram, concatenate, giv, marker, rz
from .errors import ValidationError
from .oracle import single_particle_hamiltonian
from .wavepacket import ANTIFERMION, FERMION

UNITARY_TOL = 1e-10
PHASE_TOL = 1e-15


@dataclass(frozen=True)
class GivensStep:
    """Rotation ``r_{n,l}(theta)`` on rows ``(n-1, n)`` while clearing column ``l``."""

    row: int
    theta: float
    column: int

    @property
    def target_pair(self) -> tuple[int, int]:
        return (self.row - 1, self.row)


@dataclass(frozen=True)
class PhaseLayer:
    """``p_l = diag(exp(i beta))``; entries on rows below ``l`` are zero."""

    phases: np.ndarray
    column: int


@dataclass(frozen=True)
class Decomposition:
    """``s_{k-1} ... s_0 u`` has identity in its first ``k`` columns."""

    n: int
    k: int
    phases: tuple[PhaseLayer, ...]
    steps: tuple[GivensStep, ...]

    def ordered(self):
        """Factors of each ``s_l`` in the order they multiply ``u`` (rightmost first)."""
        by_col = {p.column: [p] for p in self.phases}
        for s in self.steps:
            by_col.setdefault(s.column, []).append(s)
        for col in range(self.k):
            yield from by_col.get(col, [])

    def matrix(self) -> np.ndarray:
        """``S = s_{k-1} ... s_0`` as a dense matrix."""
        out = np.eye(self.n, dtype=complex)
        for f in self.ordered():
            out = factor_matrix(f, self.n) @ out
        return out


def rotation_matrix(n_modes: int, row: int, theta: float) -> np.ndarray:
    r = np.eye(n_modes, dtype=complex)
    c, s = math.cos(theta), math.sin(theta)
    r[row - 1, row - 1] = c
    r[row - 1, row] = -s
    r[row, row - 1] = s
    r[row, row] = c
    return r


def factor_matrix(f, n_modes: int) -> np.ndarray:
    if isinstance(f, PhaseLayer):
        return np.diag(np.exp(1j * f.phases))
    return rotation_matrix(n_modes, f.row, f.theta)


def _check_unitary(u: np.ndarray) -> None:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {u.shape}")
    err = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if err > UNITARY_TOL:
        raise ValidationError(f"matrix is not unitary (deviation {err:.2e})")


def givens_angle(pivot: float, target: float) -> float:
    """Angle clearing ``target`` into ``pivot`` (both non-negative moduli)."""
    if pivot == 0.0:
        return -math.pi / 2 if target != 0.0 else 0.0
    return math.atan(-target / pivot)


def _decompose(cols: np.ndarray, k: int) -> Decomposition:
    a = np.array(cols, dtype=complex, copy=True)
    n = a.shape[0]
    phases, steps = [], []
    for l in range(k):
        beta = np.zeros(n)
        tail = a[l:, l]
        mags = np.abs(tail)
        beta[l:] = np.where(mags > PHASE_TOL, -np.angle(tail), 0.0)
        phases.append(PhaseLayer(beta, l))
        a = np.exp(1j * beta)[:, None] * a
        a[l:, l] = np.abs(a[l:, l])
        for row in range(n - 1, l, -1):
            theta = givens_angle(a[row - 1, l].real, a[row, l].real)
            steps.append(GivensStep(row, theta, l))
            c, s = math.cos(theta), math.sin(theta)
            top, bot = a[row - 1].copy(), a[row].copy()
            a[row - 1] = c * top - s * bot
            a[row] = s * top + c * bot
            a[row, l] = 0.0
            a[row - 1, l] = abs(a[row - 1, l])
    return Decomposition(n, k, tuple(phases), tuple(steps))


def decompose_columns(u: np.ndarray, k: int) -> Decomposition:
    """Phase layers and Givens steps clearing the first ``k`` columns of a unitary ``u``."""
    _check_unitary(u)
    n = u.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    return _decompose(u, k)


def decompose_isometry(cols: np.ndarray) -> Decomposition:
    """Same as :func:`decompose_columns` for an ``N x k`` matrix with orthonormal columns."""
    cols = np.asarray(cols, dtype=complex)
    if cols.ndim == 1:
        cols = cols[:, None]
    gram = cols.conj().T @ cols
    err = np.abs(gram - np.eye(cols.shape[1])).max()
    if err > UNITARY_TOL:
        raise ValidationError(f"columns are not orthonormal (deviation {err:.2e})")
    return _decompose(cols, cols.shape[1])


# -- many-body programs ---------------------------------------------------------


def program_v_dagger_of(dec: Decomposition) -> GateProgram:
    """Gates of ``V(S^dag)``; its first ``k`` columns are the decomposed ones."""
    gates: list[Gate] = []
    by_col: dict[int, list] = {}
    for f in dec.ordered():
        by_col.setdefault(f.column, []).append(f)
    for col in sorted(by_col, reverse=True):
        factors = by_col[col]
        # s_l^dag = p_l^dag r_{N-1,l}^dag ... r_{l+1,l}^dag
        for f in reversed(factors):
            if isinstance(f, GivensStep):
                gates.append(giv(f.row - 1, f.theta))
            else:
                gates.extend(rz(q, -b) for q, b in enumerate(f.phases) if b != 0.0)
    return GateProgram(dec.n, tuple(gates))


def program_v_of(dec: Decomposition) -> GateProgram:
    """Gates of ``V(S)``, the inverse of :func:`program_v_dagger_of`."""
    return program_v_dagger_of(dec).inverse()


def synthesize_unitary(u: np.ndarray, orientation: str = "forward") -> GateProgram:
    """Full ``V(u)`` circuit. ``inverted`` synthesizes the site-mirrored triangle."""
    _check_unitary(u)
    n = u.shape[0]
    if orientation == "forward":
        return _full(u)
    if orientation == "inverted":
        perm = np.eye(n)[::-1]
        return _full(perm @ u @ perm).mirrored()
    raise ValueError(f"unknown orientation {orientation!r}")


def _full(u: np.ndarray) -> GateProgram:
    # u = S^dag with S the full decomposition of u
    return program_v_dagger_of(_decompose(u, u.shape[0]))


# -- the two-qubit gate -----------------------------------------------------------

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0 + 0j, -1.0])
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.diag([1.0 + 0j, 1j])


def kron2(low: np.ndarray, high: np.ndarray) -> np.ndarray:
    """Two-qubit operator with ``low`` on the lower qubit (bit 0)."""
    return np.kron(high, low)


def givens_gate_matrix(theta: float) -> np.ndarray:
    """4x4 matrix of ``GIV q q+1 theta``; index = bit(q) + 2 bit(q+1)."""
    c, s = math.cos(theta), math.sin(theta)
    g = np.eye(4, dtype=complex)
    g[1, 1] = c
    g[1, 2] = s
    g[2, 1] = -s
    g[2, 2] = c
    return g


def givens_generator() -> np.ndarray:
    """``(X_q Y_{q+1} - Y_q X_{q+1}) / 2``; the gate is ``exp(i theta G)``."""
    return 0.5 * (kron2(_X, _Y) - kron2(_Y, _X))


@lru_cache(maxsize=1)
def single_qubit_cliffords() -> tuple[np.ndarray, ...]:
    """The 24 single-qubit Clifford unitaries modulo phase."""
    found: list[np.ndarray] = []
    frontier = [_I2]
    while frontier:
        nxt = []
        for c in frontier:
            for g in (_H, _S):
                m = g @ c
                if not any(_equal_up_to_phase(m, f) for f in found):
                    found.append(m)
                    nxt.append(m)
        frontier = nxt
    return tuple(found)


def _equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(a[idx]) < tol:
        return False
    phase = a[idx] / b[idx]
    return np.allclose(a, phase * b, atol=tol)


@lru_cache(maxsize=1)
def _local_frame():
    """Local Clifford ``L`` with ``L XY L^dag = sx XX`` and ``L YX L^dag = sz ZZ``."""
    xy, yx = kron2(_X, _Y), kron2(_Y, _X)
    xx, zz = kron2(_X, _X), kron2(_Z, _Z)
    for ca, cb in itertools.product(single_qubit_cliffords(), repeat=2):
        big = kron2(ca, cb)
        a = big @ xy @ big.conj().T
        b = big @ yx @ big.conj().T
        for sx, sz in itertools.product((1, -1), repeat=2):
            if np.allclose(a, sx * xx) and np.allclose(b, sz * zz):
                return ca, cb, sx, sz
    raise RuntimeError("no local Clifford frame found")


def _rx(angle: float) -> np.ndarray:
    return math.cos(angle) * _I2 + 1j * math.sin(angle) * _X


def _rz_pauli(angle: float) -> np.ndarray:
    return math.cos(angle) * _I2 + 1j * math.sin(angle) * _Z


def givens_cnot_expansion(theta: float) -> list[tuple]:
    """Two-CNOT realization as ``("U", qubit, 2x2)`` and ``("CNOT", ctrl, tgt)`` entries.

    Qubit labels are 0 (lower) and 1 (upper); entries are in application order.
    The Givens generator is rotated to ``XX`` and ``ZZ`` form, which a CNOT
    pair conjugates to single-qubit ``X`` and ``Z`` rotations.
    """
    ca, cb, sx, sz = _local_frame()
    alpha = sx * theta / 2
    beta = -sz * theta / 2
    return [
        ("U", 0, ca),
        ("U", 1, cb),
        ("CNOT", 0, 1),
        ("U", 0, _rx(alpha)),
        ("U", 1, _rz_pauli(beta)),
        ("CNOT", 0, 1),
        ("U", 0, ca.conj().T),
        ("U", 1, cb.conj().T),
    ]


def expansion_matrix(entries: list[tuple]) -> np.ndarray:
    cnot = np.zeros((4, 4), dtype=complex)
    for idx in range(4):
        lo, hi = idx & 1, idx >> 1
        cnot[lo | ((hi ^ lo) << 1), idx] = 1.0
    out = np.eye(4, dtype=complex)
    for e in entries:
        if e[0] == "CNOT":
            if e[1:] != (0, 1):
                raise ValueError("only CNOT(0 -> 1) is produced by the expansion")
            out = cnot @ out
        else:
            _, q, m = e
            out = (kron2(m, _I2) if q == 0 else kron2(_I2, m)) @ out
    return out


def entangler_count(entries: list[tuple]) -> int:
    return sum(1 for e in entries if e[0] == "CNOT")


# -- free evolution ---------------------------------------------------------------


@dataclass(frozen=True)
class EvolutionMatrix:
    m_matrix: np.ndarray
    u_t: np.ndarray


def free_evolution_matrix(m: float, t: float, n_sites: int) -> EvolutionMatrix:
    """``M = -i h t`` and ``u_t = exp(M)``; valid for the free theory only."""
    h = single_particle_hamiltonian(m, n_sites)
    energies, vecs = np.linalg.eigh(h)
    u_t = (vecs * np.exp(-1j * energies * t)) @ vecs.conj().T
    return EvolutionMatrix(-1j * t * h, u_t)


def compress_product(u_t: np.ndarray, prep: Decomposition) -> np.ndarray:
    """``u_t' = u_t S^dag`` so one synthesis covers excitation frame plus evolution."""
    return u_t @ prep.matrix().conj().T


# -- state preparation ----------------------------------------------------------


@dataclass(frozen=True)
class PreparedProgram:
    """Program plus the single-particle frames that define it."""

    program: GateProgram
    method: str
    frames: tuple[Decomposition, ...]


def _frame_column(phi: np.ndarray, species: str) -> np.ndarray:
    return phi if species == FERMION else phi.conj()


def _excitation(species: str, unitary: bool, q: int = 0) -> list[Gate]:
    if unitary:
        return [marker("PX", q)]
    return [marker("SM" if species == FERMION else "SP", q)]


def synthesize_state_prep(
    packets: list[tuple[str, np.ndarray]],
    unitary_excitations: bool = False,
    method: str = "auto",
) -> PreparedProgram:
    """Circuit mapping the vacuum to ``prod_i B_i^dag |Omega>`` (last packet applied last).

    ``packets`` are ``(species, position amplitudes)`` pairs. A fermion plus an
    antifermion uses the shared two-column frame; any other combination chains
    single-packet conjugations ``V(phi) sigma V(phi)^dag``. With
    ``unitary_excitations`` the Pauli ``X`` stands in for the ladder operator,
    exact on the free vacuum.
    """
    if not packets:
        raise ValueError("at least one packet is required")
    n = len(packets[0][1])
    species = [s for s, _ in packets]
    pair = len(packets) == 2 and set(species) == {FERMION, ANTIFERMION}
    if method == "auto":
        method = "ucd" if pair else "chain"
    if method == "ucd" and not pair:
        warnings.warn("same-species packets have no shared frame; using chained conjugations")
        method = "chain"
    if method == "ucd":
        (sc, pc), (sd, pd) = packets if species[0] == FERMION else packets[::-1]
        cols = np.column_stack([pc, pd.conj()])
        dec = decompose_isometry(cols)
        inner = program_v_of(dec)
        outer = program_v_dagger_of(dec)
        if unitary_excitations:
            # (D + D^dag)(C + C^dag) = V Z_0 X_1 X_0 V^dag
            mids = [marker("PX", 0), marker("PZ", 0), marker("PX", 1)]
        else:
            # D^dag C^dag = V xi_1 xi_0^dag V^dag, xi_1 = Z_0 sigma^+_1
            mids = [marker("SM", 0), marker("SP", 1), marker("PZ", 0)]
        prog = concatenate(n, [inner, *mids, outer])
        return PreparedProgram(prog, "ucd", (dec,))
    if method != "chain":
        raise ValueError(f"unknown preparation method {method!r}")
    parts: list = []
    frames = []
    for sp_, phi in packets:
        dec = decompose_isometry(_frame_column(np.asarray(phi, dtype=complex), sp_))
        frames.append(dec)
        parts += [program_v_of(dec), *_excitation(sp_, unitary_excitations), program_v_dagger_of(dec)]
    return PreparedProgram(concatenate(n, parts), "chain", tuple(frames))


def synthesize_scattering_program(
    phi_c: np.ndarray,
    phi_d: np.ndarray,
    m: float,
    t: float,
    orientation: str = "forward",
) -> GateProgram:
    """Free-theory circuit ``V(u_t') X-markers V(S)`` reaching time ``t`` in one pass.

    ``inverted`` builds the same state with every gate reflected through the
    lattice centre, so light cones of upper-half sites stay short.
    """
    n = len(phi_c)
    u_t = free_evolution_matrix(m, t, n).u_t
    if orientation == "inverted":
        rev = np.eye(n)[::-1]
        return _scattering(np.asarray(phi_c)[::-1], np.asarray(phi_d)[::-1], rev @ u_t @ rev).mirrored()
    if orientation != "forward":
        raise ValueError(f"unknown orientation {orientation!r}")
    return _scattering(phi_c, phi_d, u_t)


def _scattering(phi_c: np.ndarray, phi_d: np.ndarray, u_t: np.ndarray) -> GateProgram:
    n = len(phi_c)
    dec = decompose_isometry(np.column_stack([phi_c, np.conj(phi_d)]))
    evolve = synthesize_unitary(compress_product(u_t, dec))
    mids = [marker("PX", 0), marker("PZ", 0), marker("PX", 1)]
    return concatenate(n, [program_v_of(dec), *mids, evolve])


def is_number_conserving(program: GateProgram) -> bool:
    return all(g.kind in ("RZ", "GIV", "PZ", "BARRIER") for g in program.gates)
