"""Particle densities, entanglement entropies and the ancilla-based expectation scheme."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .circuit import GateProgram
from .errors import NumericalHealthError, ValidationError
from .lattice import site_occupation
from .pauli import PauliSum
from .statevector import apply_program, entanglement_entropy, normalized

# -- densities -----------------------------------------------------------------


def occupation_matrix(n_sites: int) -> np.ndarray:
    """``(2^N, N)`` table of site occupations per basis state."""
    return np.column_stack([site_occupation(n_sites, s) for s in range(n_sites)])


def particle_density(state: np.ndarray, site: int) -> float:
    n = int(round(math.log2(state.size)))
    if not 0 <= site < n:
        raise IndexError(f"site {site} outside 0..{n - 1}")
    probs = np.abs(state) ** 2
    return float(probs @ site_occupation(n, site) / probs.sum())


def site_densities(states: np.ndarray) -> np.ndarray:
    """Normalized occupations for one state ``(dim,)`` or a batch ``(T, dim)``."""
    states = np.atleast_2d(states)
    n = int(round(math.log2(states.shape[1])))
    probs = np.abs(states) ** 2
    probs /= probs.sum(axis=1, keepdims=True)
    return probs @ occupation_matrix(n)


@dataclass(frozen=True)
class ObservableSeries:
    """Values on a (time x site) or (time x cut) grid."""

    times: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.values.shape[0] != np.asarray(self.times).size:
            raise ValueError("series rows must match the number of times")
        if self.kind not in ("delta_density", "S1", "S2"):
            raise ValueError(f"unknown series kind {self.kind!r}")

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]

    def axis_labels(self) -> np.ndarray:
        """Sites ``0..N-1`` for densities, cuts ``1..N-1`` for entropies."""
        if self.kind == "delta_density":
            return np.arange(self.n_columns)
        return np.arange(1, self.n_columns + 1)


def delta_density_series(times, states: np.ndarray, vacuum: np.ndarray) -> ObservableSeries:
    values = site_densities(states) - site_densities(vacuum)[0]
    return ObservableSeries(np.asarray(times, dtype=float), values, "delta_density")


def lobe_positions(series: ObservableSeries) -> tuple[np.ndarray, np.ndarray]:
    """Site of the largest positive and most negative value at every time."""
    if series.kind != "delta_density":
        raise ValueError("lobe tracking needs a density series")
    return np.argmax(series.values, axis=1), np.argmin(series.values, axis=1)


def _entropy_rows(states: np.ndarray) -> np.ndarray:
    states = np.atleast_2d(states)
    n = int(round(math.log2(states.shape[1])))
    return np.array([[entanglement_entropy(s, c) for c in range(1, n)] for s in states])


def entropy_series(
    times,
    pair_states: np.ndarray,
    c_states: np.ndarray,
    d_states: np.ndarray,
    vacuum: np.ndarray,
) -> tuple[ObservableSeries, ObservableSeries]:
    """Excess entropies: ``dS1`` of the pair run and ``dS2 = dS1 - dS1_C - dS1_D``."""
    times = np.asarray(times, dtype=float)
    base = _entropy_rows(vacuum)[0]
    s1 = _entropy_rows(pair_states) - base
    s1_c = _entropy_rows(c_states) - base
    s1_d = _entropy_rows(d_states) - base
    return ObservableSeries(times, s1, "S1"), ObservableSeries(times, s1 - (s1_c + s1_d), "S2")


def density_csv(series: ObservableSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "site", "delta_density"])
    for ti, t in enumerate(series.times):
        for s, val in enumerate(series.values[ti]):
            w.writerow([repr(float(t)), s, repr(float(val))])
    return buf.getvalue()


def entropy_csv(s1: ObservableSeries, s2: ObservableSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "cut", "S1", "S2"])
    for ti, t in enumerate(s1.times):
        for ci in range(s1.n_columns):
            w.writerow([repr(float(t)), ci + 1, repr(float(s1.values[ti, ci])), repr(float(s2.values[ti, ci]))])
    return buf.getvalue()


# -- multi-index expansion of ladder excitations -------------------------------------

Block = Union[GateProgram, np.ndarray, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class MultiIndex:
    """Pauli labels ``(mu1, mu2, mu3, mu4)`` of the four excitation slots."""

    mu: tuple[str, str, str, str]

    def __post_init__(self):
        if len(self.mu) != 4 or any(m not in ("x", "y") for m in self.mu):
            raise ValueError(f"multi-index entries must be 'x' or 'y', got {self.mu}")

    @property
    def coefficient(self) -> complex:
        signs = (1j, -1j, 1j, -1j)
        c = 1 + 0j
        for s, m in zip(signs, self.mu):
            if m == "y":
                c *= s
        return c

    def partner(self) -> "MultiIndex":
        """Index of the complex-conjugate term."""
        return MultiIndex(tuple(reversed(self.mu)))

    @classmethod
    def all(cls) -> list["MultiIndex"]:
        return [cls(mu) for mu in itertools.product("xy", repeat=4)]


@dataclass(frozen=True)
class FactorizedState:
    """``|psi> = U3 sigma^+_q U2 sigma^-_q U1 |0>`` with blocks applied left to right in each list.

    Each block entry is a :class:`GateProgram`, a dense unitary, or a callable
    acting on a state vector.
    """

    n_qubits: int
    u1: tuple[Block, ...]
    u2: tuple[Block, ...]
    u3: tuple[Block, ...]
    site: int = 0


def _apply_block(state: np.ndarray, block: Sequence[Block]) -> np.ndarray:
    out = state
    for op in block:
        if isinstance(op, GateProgram):
            out = apply_program(out, op)
        elif isinstance(op, np.ndarray):
            out = op @ out
        else:
            out = op(out)
    return out


def _pauli_on(state: np.ndarray, n_qubits: int, q: int, mu: str) -> np.ndarray:
    idx = np.arange(state.size)
    bit = (idx >> q) & 1
    flipped = state[idx ^ (1 << q)]
    if mu == "x":
        return flipped
    # Y|0> = i|1>, Y|1> = -i|0>
    return np.where(bit == 1, 1j, -1j) * flipped


def _ladder_on(state: np.ndarray, q: int, kind: str) -> np.ndarray:
    idx = np.arange(state.size)
    bit = (idx >> q) & 1
    flipped = state[idx ^ (1 << q)]
    keep = bit == 0 if kind == "+" else bit == 1
    return np.where(keep, flipped, 0.0)


def _zero_state(n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    return psi


def factorized_vector(fs: FactorizedState) -> np.ndarray:
    """Unnormalized ``|psi>`` evaluated with the ladder operators themselves."""
    psi = _apply_block(_zero_state(fs.n_qubits), fs.u1)
    psi = _ladder_on(psi, fs.site, "-")
    psi = _apply_block(psi, fs.u2)
    psi = _ladder_on(psi, fs.site, "+")
    return _apply_block(psi, fs.u3)


def _branches(fs: FactorizedState, mu: MultiIndex) -> tuple[np.ndarray, np.ndarray]:
    """``|A> = U3 s^mu2 U2 s^mu1 U1|0>`` and ``|B> = U3 s^mu3 U2 s^mu4 U1|0>``."""
    base = _apply_block(_zero_state(fs.n_qubits), fs.u1)
    out = []
    for first, second in ((mu.mu[0], mu.mu[1]), (mu.mu[3], mu.mu[2])):
        psi = _pauli_on(base, fs.n_qubits, fs.site, first)
        psi = _apply_block(psi, fs.u2)
        psi = _pauli_on(psi, fs.n_qubits, fs.site, second)
        out.append(_apply_block(psi, fs.u3))
    return out[0], out[1]


def _check_hermitian(obs: PauliSum) -> None:
    if not obs.is_hermitian():
        raise ValidationError("observable must be Hermitian")


def matrix_element(fs: FactorizedState, mu: MultiIndex, obs: PauliSum) -> complex:
    """``<O>_mu = <A| O |B>``."""
    a, b = _branches(fs, mu)
    return complex(np.vdot(a, _apply_pauli_sum(obs, b)))


def _apply_pauli_sum(obs: PauliSum, state: np.ndarray) -> np.ndarray:
    return obs.to_sparse() @ state


def hadamard_term_direct(fs: FactorizedState, mu: MultiIndex, obs: PauliSum) -> float:
    """``c <O>_mu + h.c.`` from direct bra-ket contraction."""
    _check_hermitian(obs)
    return float(2 * (mu.coefficient * matrix_element(fs, mu, obs)).real)


def _apply_block_ancilla(state: np.ndarray, n: int, block: Sequence[Block]) -> np.ndarray:
    rows = state.reshape(2, 1 << n)
    return np.stack([_apply_block(rows[0], block), _apply_block(rows[1], block)]).reshape(-1)


def _controlled_pauli(state: np.ndarray, n: int, q: int, mu: str, control: int) -> np.ndarray:
    rows = state.reshape(2, 1 << n).copy()
    rows[control] = _pauli_on(rows[control], n, q, mu)
    return rows.reshape(-1)


def hadamard_term_circuit(fs: FactorizedState, mu: MultiIndex, obs: PauliSum) -> float:
    """Same quantity from an exact simulation of the ancilla interference circuit.

    The ancilla is qubit ``N``. It starts in ``H|0>`` when the coefficient is
    real and in ``Rx(pi/2)|0>`` when imaginary, the excitation Paulis are
    controlled on it (value 0 for the ket branch, 1 for the bra branch), and
    after a closing Hadamard the product ``Z_anc O`` is read out.
    """
    _check_hermitian(obs)
    n = fs.n_qubits
    c = mu.coefficient
    real = abs(c.imag) < 0.5
    s2 = 1 / math.sqrt(2)
    anc = np.array([s2, s2]) if real else np.array([s2, -1j * s2])
    state = np.kron(anc, _zero_state(n))
    state = _apply_block_ancilla(state, n, fs.u1)
    state = _controlled_pauli(state, n, fs.site, mu.mu[3], 0)
    state = _controlled_pauli(state, n, fs.site, mu.mu[0], 1)
    state = _apply_block_ancilla(state, n, fs.u2)
    state = _controlled_pauli(state, n, fs.site, mu.mu[2], 0)
    state = _controlled_pauli(state, n, fs.site, mu.mu[1], 1)
    state = _apply_block_ancilla(state, n, fs.u3)
    rows = state.reshape(2, 1 << n)
    rows = np.stack([rows[0] + rows[1], rows[0] - rows[1]]) * s2
    o_rows = np.stack([_apply_pauli_sum(obs, rows[0]), _apply_pauli_sum(obs, rows[1])])
    value = float((np.vdot(rows[0], o_rows[0]) - np.vdot(rows[1], o_rows[1])).real)
    # real c: value = Re<A|O|B>; imaginary c: value = -Im<A|O|B>
    return 2 * c.real * value if real else 2 * c.imag * value


def hadamard_term(fs: FactorizedState, mu: MultiIndex, obs: PauliSum, method: str = "direct") -> float:
    if method == "direct":
        return hadamard_term_direct(fs, mu, obs)
    if method == "circuit":
        return hadamard_term_circuit(fs, mu, obs)
    raise ValueError(f"unknown method {method!r}")


def multi_index_sum(fs: FactorizedState, obs: PauliSum, method: str = "direct") -> float:
    """``(1/16) sum_mu c_mu <O>_mu``; each conjugate pair appears twice, hence the 1/2."""
    total = sum(hadamard_term(fs, mu, obs, method) for mu in MultiIndex.all())
    return total / 32.0


def assemble_expectation(fs: FactorizedState, obs: PauliSum, method: str = "direct") -> float:
    """``<psi|O|psi> / <psi|psi>`` assembled from the sixteen multi-index terms."""
    norm = multi_index_sum(fs, PauliSum.identity(fs.n_qubits), method)
    if norm < 1e-12:
        raise NumericalHealthError(f"state norm {norm:.3e} vanishes; the excitation annihilated it")
    return multi_index_sum(fs, obs, method) / norm


def density_observable(n_qubits: int, site: int) -> PauliSum:
    """``(1 - Z_site) / 2``."""
    return PauliSum.identity(n_qubits, 0.5) + PauliSum.single(n_qubits, {site: "Z"}, -0.5)


# -- shot noise ------------------------------------------------------------------------


@dataclass(frozen=True)
class ShotEstimate:
    value: float
    stderr: float
    shots: int | None


def shot_sample(
    expectations: np.ndarray | float,
    shots: int | None,
    rng: np.random.Generator | int | None = None,
    weights: np.ndarray | None = None,
) -> ShotEstimate:
    """Binomial estimate of ``sum_i w_i <P_i>`` for +-1 observables ``P_i``.

    Every observable is measured with ``shots`` repetitions. ``shots=None``
    returns the exact value with zero error.
    """
    exp = np.atleast_1d(np.asarray(expectations, dtype=float))
    w = np.ones_like(exp) if weights is None else np.asarray(weights, dtype=float)
    if np.any(np.abs(exp) > 1 + 1e-12):
        raise ValueError("expectations of +-1 observables must lie in [-1, 1]")
    exact = float(w @ exp)
    if shots is None:
        return ShotEstimate(exact, 0.0, None)
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    p_plus = np.clip((1 + exp) / 2, 0.0, 1.0)
    k = rng.binomial(shots, p_plus)
    est = 2 * k / shots - 1
    var = np.clip(1 - est**2, 0.0, None) / shots
    return ShotEstimate(float(w @ est), float(math.sqrt(np.sum(w**2 * var))), shots)


def scattering_factorization(
    vacuum: np.ndarray,
    phi_c: np.ndarray,
    phi_d: np.ndarray,
    evolution: Block | None = None,
) -> FactorizedState:
    """Blocks for ``e^{-iHt} D^dag C^dag |Omega>`` with single-packet frames.

    ``U1 = V(phi_c)^dag U0``, ``U2 = V(phi_d*)^dag V(phi_c)``,
    ``U3 = e^{-iHt} V(phi_d*)``; ``U0`` is a reflection onto ``vacuum``.
    """
    from .givens import decompose_isometry, program_v_dagger_of, program_v_of
    from .statevector import householder_prep

    n = len(phi_c)
    dec_c = decompose_isometry(np.asarray(phi_c, dtype=complex))
    dec_d = decompose_isometry(np.conj(np.asarray(phi_d, dtype=complex)))
    v_c, v_c_dag = program_v_dagger_of(dec_c), program_v_of(dec_c)
    v_d, v_d_dag = program_v_dagger_of(dec_d), program_v_of(dec_d)
    u3: tuple = (v_d,) if evolution is None else (v_d, evolution)
    return FactorizedState(n, (householder_prep(vacuum), v_c_dag), (v_c, v_d_dag), u3, site=0)


def _ancilla_sign(mu: MultiIndex) -> float:
    c = mu.coefficient
    return float(c.real) if abs(c.imag) < 0.5 else float(c.imag)


def hadamard_density_estimate(
    fs: FactorizedState,
    site: int,
    shots: int | None = None,
    rng: np.random.Generator | int | None = None,
) -> ShotEstimate:
    """Occupation of ``site`` from the sixteen ancilla circuits, each run ``shots`` times.

    Both the ``Z_site`` numerator and the identity normalization are sampled;
    the ratio's error follows from first-order propagation.
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    n = fs.n_qubits
    ident = PauliSum.identity(n)
    z_op = PauliSum.single(n, {site: "Z"})
    mus = MultiIndex.all()
    weights = np.array([2 * _ancilla_sign(mu) for mu in mus]) / 32.0
    v_id = np.array([hadamard_term_direct(fs, mu, ident) for mu in mus]) / (32.0 * weights)
    v_z = np.array([hadamard_term_direct(fs, mu, z_op) for mu in mus]) / (32.0 * weights)
    norm = shot_sample(np.clip(v_id, -1, 1), shots, rng, weights)
    zed = shot_sample(np.clip(v_z, -1, 1), shots, rng, weights)
    if norm.value < 1e-12:
        raise NumericalHealthError(f"sampled norm {norm.value:.3e} is not positive")
    ratio = zed.value / norm.value
    err = math.hypot(zed.stderr / norm.value, ratio * norm.stderr / norm.value)
    return ShotEstimate(0.5 - 0.5 * ratio, 0.5 * err, shots)
