"""Density-matrix noise simulation, Pauli twirling and zero-noise extrapolation.

Everything here is dense and meant for a handful of qubits. A gate program is
lowered to alternating single-qubit moments and CNOT layers (each Givens gate
costs two CNOTs); a sparse Pauli-Lindblad channel follows every CNOT layer.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import curve_fit, nnls

from .circuit import GateProgram, schedule_layers
from .errors import DomainError, ResourceError, ValidationError
from .givens import givens_cnot_expansion
from .pauli import string_action

MAX_DENSE_QUBITS = 8

_PAULI_2X2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_size(n_qubits: int) -> None:
    if n_qubits > MAX_DENSE_QUBITS:
        raise ResourceError(f"dense density matrices are limited to {MAX_DENSE_QUBITS} qubits")


def pauli_conjugate(rho: np.ndarray, s: str) -> np.ndarray:
    """``P rho P^dag`` using the permutation-and-sign form of ``P``."""
    rows, vals = string_action(s)
    out = np.empty_like(rho)
    out[np.ix_(rows, rows)] = vals[:, None] * rho * vals.conj()[None, :]
    return out


def pauli_matrix(s: str) -> np.ndarray:
    rows, vals = string_action(s)
    dim = len(rows)
    out = np.zeros((dim, dim), dtype=complex)
    out[rows, np.arange(dim)] = vals
    return out


# ---------------------------------------------------------------------------
# Pauli-Lindblad channel


@dataclass(frozen=True)
class PauliLindbladModel:
    """Product of Pauli channels ``rho -> w rho + (1 - w) P rho P`` with ``w = (1 + e^{-2 lam})/2``."""

    n_qubits: int
    terms: tuple[tuple[str, float], ...]

    def __post_init__(self):
        clean = []
        for s, lam in self.terms:
            if len(s) != self.n_qubits or set(s) - set("IXYZ"):
                raise ValidationError(f"bad Pauli string {s!r} for {self.n_qubits} qubits")
            if lam < 0:
                raise DomainError(f"rate for {s} must be non-negative, got {lam}")
            clean.append((s, float(lam)))
        object.__setattr__(self, "terms", tuple(clean))

    @property
    def rates(self) -> np.ndarray:
        return np.array([lam for _, lam in self.terms])

    @property
    def weights(self) -> np.ndarray:
        return (1 + np.exp(-2 * self.rates)) / 2

    def scaled(self, gain: float) -> "PauliLindbladModel":
        if gain < 0:
            raise DomainError(f"gain must be non-negative, got {gain}")
        return PauliLindbladModel(self.n_qubits, tuple((s, lam * gain) for s, lam in self.terms))

    def pauli_fidelity(self, s: str, gain: float = 1.0) -> float:
        """Eigenvalue of the channel on Pauli ``s``: product of ``e^{-2 lam G}`` over anticommuting terms."""
        total = sum(lam for p, lam in self.terms if not _commutes(p, s))
        return math.exp(-2 * total * gain)


def _commutes(a: str, b: str) -> bool:
    anti = sum(1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y)
    return anti % 2 == 0


def local_model(n_qubits: int, rate_1q: float, rate_2q: float, rng=None) -> PauliLindbladModel:
    """Sparse model with one-qubit X/Y/Z terms and nearest-neighbour two-qubit terms.

    With ``rng`` the rates are drawn uniformly in ``[0.5, 1.5]`` times the given scale.
    """
    terms = []

    def rate(scale):
        return scale if rng is None else scale * rng.uniform(0.5, 1.5)

    for q in range(n_qubits):
        for p in "XYZ":
            s = ["I"] * n_qubits
            s[q] = p
            terms.append(("".join(s), rate(rate_1q)))
    for q in range(n_qubits - 1):
        for a in "XYZ":
            for b in "XYZ":
                s = ["I"] * n_qubits
                s[q], s[q + 1] = a, b
                terms.append(("".join(s), rate(rate_2q)))
    return PauliLindbladModel(n_qubits, tuple(terms))


SUPEROPERATOR_MAX_QUBITS = 5


@lru_cache(maxsize=64)
def channel_superoperator(model: PauliLindbladModel, gain: float) -> np.ndarray:
    """Row-major vectorized ``Lambda^gain`` (``vec(rho') = S vec(rho)``) for small models."""
    if model.n_qubits > SUPEROPERATOR_MAX_QUBITS:
        raise ResourceError(f"superoperators are limited to {SUPEROPERATOR_MAX_QUBITS} qubits")
    dim = 1 << model.n_qubits
    cols = []
    for k in range(dim * dim):
        e = np.zeros(dim * dim, dtype=complex)
        e[k] = 1.0
        cols.append(apply_channel(e.reshape(dim, dim), model, gain).ravel())
    return np.array(cols).T


def apply_channel(rho: np.ndarray, model: PauliLindbladModel, gain: float = 1.0) -> np.ndarray:
    """Apply ``Lambda^gain``: every rate multiplied by ``gain``; ``gain = 1`` is the base noise."""
    if gain < 0:
        raise DomainError(f"gain must be non-negative, got {gain}")
    _check_size(model.n_qubits)
    out = np.array(rho, dtype=complex)
    if out.shape != (1 << model.n_qubits,) * 2:
        raise ValidationError("density matrix does not match the model size")
    for s, lam in model.terms:
        if lam == 0.0 or gain == 0.0:
            continue
        w = (1 + math.exp(-2 * lam * gain)) / 2
        out = w * out + (1 - w) * pauli_conjugate(out, s)
    return out


# ---------------------------------------------------------------------------
# Lowering to CNOT layers


@dataclass(frozen=True)
class SingleMoment:
    ops: tuple[tuple[int, np.ndarray], ...]


@dataclass(frozen=True)
class CnotLayer:
    pairs: tuple[tuple[int, int], ...]


Moment = SingleMoment | CnotLayer


def _gate_2x2(g) -> np.ndarray:
    if g.kind == "RZ":
        return np.diag([1.0, np.exp(1j * g.param)]).astype(complex)
    if g.kind in ("PX", "PY", "PZ"):
        return _PAULI_2X2[g.kind[1]]
    raise ValidationError(f"gate {g.kind} cannot be lowered to a unitary")


def lower_program(program: GateProgram) -> list[Moment]:
    """Alternating single-qubit moments and CNOT layers, two CNOT layers per Givens layer."""
    if not program.is_unitary:
        raise ValidationError("only unitary programs can be lowered")
    sched = schedule_layers(program)
    by_layer: dict[int, list] = {}
    for g, layer in zip(sched.gates, sched.layers):
        by_layer.setdefault(layer, []).append(g)
    moments: list[Moment] = []
    for layer in sorted(by_layer):
        gates = by_layer[layer]
        pre = [(g.qubits[0], _gate_2x2(g)) for g in gates if not g.is_two_qubit]
        stages: list[list[tuple[int, np.ndarray]]] = [pre, [], []]
        pairs = []
        for g in gates:
            if not g.is_two_qubit:
                continue
            pairs.append(g.qubits)
            seen = 0
            for kind, a, b in givens_cnot_expansion(g.param):
                if kind == "CNOT":
                    seen += 1
                else:
                    stages[seen].append((g.qubits[a], b))
        moments.append(SingleMoment(tuple(stages[0])))
        if pairs:
            moments.append(CnotLayer(tuple(pairs)))
            moments.append(SingleMoment(tuple(stages[1])))
            moments.append(CnotLayer(tuple(pairs)))
            moments.append(SingleMoment(tuple(stages[2])))
    return [m for m in moments if not (isinstance(m, SingleMoment) and not m.ops)]


def _embed(n: int, q: int, u: np.ndarray) -> np.ndarray:
    return np.kron(np.kron(np.eye(1 << (n - q - 1)), u), np.eye(1 << q))


def single_moment_matrix(n: int, moment: SingleMoment) -> np.ndarray:
    out = np.eye(1 << n, dtype=complex)
    for q, u in moment.ops:
        out = _embed(n, q, u) @ out
    return out


def cnot_layer_matrix(n: int, layer: CnotLayer) -> np.ndarray:
    idx = np.arange(1 << n)
    target = idx.copy()
    for c, t in layer.pairs:
        target ^= ((target >> c) & 1) << t
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    out[target, idx] = 1.0
    return out


def moments_matrix(n: int, moments: Sequence[Moment]) -> np.ndarray:
    out = np.eye(1 << n, dtype=complex)
    for m in moments:
        mat = cnot_layer_matrix(n, m) if isinstance(m, CnotLayer) else single_moment_matrix(n, m)
        out = mat @ out
    return out


# ---------------------------------------------------------------------------
# Pauli twirling


def _random_string(n: int, rng: np.random.Generator) -> str:
    return "".join("IXYZ"[i] for i in rng.integers(0, 4, size=n))


def _string_from_index(n: int, k: int) -> str:
    return "".join("IXYZ"[(k >> (2 * q)) & 3] for q in range(n))


def conjugate_through(layer_matrix: np.ndarray, s: str) -> tuple[complex, str]:
    """``(phase, s')`` with ``U P_s U^dag = phase * P_s'`` for a Clifford ``U``."""
    n = len(s)
    m = layer_matrix @ pauli_matrix(s) @ layer_matrix.conj().T
    row = int(np.argmax(np.abs(m[:, 0])))
    a = m[row, 0]
    out = []
    for q in range(n):
        # P'|e_q> = (-1)^{z_q} P'|0> shifted by e_q
        b = m[row ^ (1 << q), 1 << q]
        z = 0 if abs(b / a - 1) < 1e-9 else 1
        out.append("IXZY"[((row >> q) & 1) + 2 * z])
    s_out = "".join(out)
    ref = pauli_matrix(s_out)
    phase = complex(np.vdot(ref.ravel(), m.ravel()) / (1 << n))
    if not np.allclose(m, phase * ref, atol=1e-10):
        raise ValidationError("layer is not Clifford")
    return phase, s_out


@dataclass(frozen=True)
class TwirledLayer:
    """``phase * P_after . U . P_before`` equals ``U`` exactly."""

    layer: CnotLayer
    before: str
    after: str
    phase: complex

    def matrix(self, n: int) -> np.ndarray:
        u = cnot_layer_matrix(n, self.layer)
        return self.phase * pauli_matrix(self.after) @ u @ pauli_matrix(self.before)


def twirl_layer(layer: CnotLayer, n_qubits: int, seed=None, before: str | None = None) -> TwirledLayer:
    """Uniformly sampled Pauli dressing of a CNOT layer; ``before`` fixes the sample."""
    rng = np.random.default_rng(seed)
    if before is None:
        before = _random_string(n_qubits, rng)
    u = cnot_layer_matrix(n_qubits, layer)
    phase, after = conjugate_through(u, before)
    # U P U^dag = phase P' ; so P' U P = conj(phase) U P P = conj(phase) U
    return TwirledLayer(layer, before, after, phase)


def balanced_twirl_indices(n_qubits: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Indices into the ``4^n`` Pauli strings, each instance uniform, drawn in shuffled full passes."""
    size = 4**n_qubits
    passes = [rng.permutation(size) for _ in range(-(-count // size))]
    return np.concatenate(passes)[:count]


def pauli_transfer_matrix(channel, n_qubits: int) -> np.ndarray:
    """``R_ij = tr(P_i E(P_j)) / d`` for a channel given as a callable on density matrices."""
    dim = 1 << n_qubits
    labels = [_string_from_index(n_qubits, k) for k in range(4**n_qubits)]
    mats = [pauli_matrix(s) for s in labels]
    out = np.zeros((len(labels), len(labels)))
    for j, pj in enumerate(mats):
        image = channel(pj)
        for i, pi in enumerate(mats):
            out[i, j] = np.real(np.trace(pi @ image)) / dim
    return out


def off_diagonal_weight(ptm: np.ndarray) -> float:
    return float(np.max(np.abs(ptm - np.diag(np.diag(ptm)))))


def twirled_error_ptm(
    layer: CnotLayer, n_qubits: int, noisy_layer, instances: int, seed=None
) -> np.ndarray:
    """Transfer matrix of the averaged error ``E = avg_instances(noisy) o U^dag``.

    ``noisy_layer(rho)`` applies the imperfect layer; the ideal inverse is undone after.
    """
    rng = np.random.default_rng(seed)
    u = cnot_layer_matrix(n_qubits, layer)
    idx = balanced_twirl_indices(n_qubits, instances, rng)
    dressings = [twirl_layer(layer, n_qubits, before=_string_from_index(n_qubits, int(k))) for k in idx]

    def channel(rho):
        acc = np.zeros_like(rho, dtype=complex)
        for tw in dressings:
            x = u.conj().T @ rho @ u  # undo the ideal layer before the noisy instance
            x = pauli_conjugate(x, tw.before)
            x = noisy_layer(x)
            x = pauli_conjugate(x, tw.after)
            acc += x
        return acc / len(dressings)

    return pauli_transfer_matrix(channel, n_qubits)


# ---------------------------------------------------------------------------
# Readout twirling


@dataclass(frozen=True)
class ReadoutModel:
    """Independent classical bit flips: ``p01`` reads 0 as 1, ``p10`` reads 1 as 0."""

    p01: float = 0.0
    p10: float = 0.0

    def __post_init__(self):
        for p in (self.p01, self.p10):
            if not 0 <= p <= 1:
                raise DomainError(f"flip probability {p} outside [0, 1]")

    @property
    def contrast(self) -> float:
        return 1.0 - self.p01 - self.p10

    def corrupt(self, bits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(bits.shape)
        flip = np.where(bits == 0, u < self.p01, u < self.p10)
        return bits ^ flip.astype(bits.dtype)


def sample_bits(probs: np.ndarray, n_qubits: int, shots: int, rng: np.random.Generator) -> np.ndarray:
    """``(shots, n_qubits)`` array of measured bits from basis-state probabilities."""
    p = np.clip(np.real(probs), 0, None)
    p = p / p.sum()
    counts = rng.multinomial(shots, p)
    states = np.repeat(np.arange(len(p)), counts)
    rng.shuffle(states)
    return ((states[:, None] >> np.arange(n_qubits)[None, :]) & 1).astype(np.int64)


def readout_twirl(
    probs: np.ndarray,
    n_qubits: int,
    shots: int,
    readout: ReadoutModel,
    seed=None,
    twirl: bool = True,
) -> np.ndarray:
    """Per-qubit ``<Z>`` from ``shots`` samples with a random X-mask before readout.

    The mask flips the state before the faulty readout and is undone classically,
    so asymmetric flips average into the contrast ``1 - p01 - p10``.
    """
    rng = np.random.default_rng(seed)
    mask = rng.integers(0, 2, size=n_qubits) if twirl else np.zeros(n_qubits, dtype=np.int64)
    ideal = sample_bits(probs, n_qubits, shots, rng)
    read = readout.corrupt(ideal ^ mask[None, :], rng) ^ mask[None, :]
    return 1.0 - 2.0 * read.mean(axis=0)


# ---------------------------------------------------------------------------
# Zero-noise extrapolation


@dataclass(frozen=True)
class ZneFit:
    gains: np.ndarray
    means: np.ndarray
    errors: np.ndarray
    model: str
    params: np.ndarray
    value: float
    stderr: float
    residual: float
    diagnostic: str = ""

    def predict(self, gain) -> np.ndarray:
        g = np.asarray(gain, dtype=float)
        if self.model == "linear":
            return self.params[0] + self.params[1] * g
        return self.params[0] * np.exp(-self.params[1] * g)


def _linear(g, a, b):
    return a + b * g


def _exponential(g, a, b):
    return a * np.exp(-b * g)


def _fit(func, gains, means, errors, p0):
    sigma = errors if np.all(errors > 0) else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params, cov = curve_fit(
            func, gains, means, p0=p0, sigma=sigma, absolute_sigma=sigma is not None, maxfev=20000
        )
    resid = means - func(gains, *params)
    weight = 1.0 / errors**2 if sigma is not None else np.ones_like(means)
    return params, cov, float(np.sum(weight * resid**2))


def zne_extrapolate(gains, means, errors=None) -> ZneFit:
    """Fit ``a + bG`` and ``a e^{-bG}``; keep the smaller (weighted) residual and report ``G -> 0``."""
    gains = np.asarray(gains, dtype=float)
    means = np.asarray(means, dtype=float)
    errors = np.zeros_like(means) if errors is None else np.asarray(errors, dtype=float)
    if len(gains) < 3:
        raise DomainError("extrapolation needs at least three gain points")
    if gains[0] != 1.0 or np.any(np.diff(gains) <= 0):
        raise DomainError("gains must start at 1 and increase strictly")
    if np.any(errors < 0):
        raise DomainError("errors must be non-negative")

    lin_p, lin_cov, lin_r = _fit(_linear, gains, means, errors, p0=np.polyfit(gains, means, 1)[::-1])
    best = ("linear", lin_p, lin_cov, lin_r)
    diagnostic = ""
    if np.all(means > 0) or np.all(means < 0):
        slope, icpt = np.polyfit(gains, np.log(np.abs(means)), 1)
        p0 = [math.copysign(math.exp(icpt), means[0]), -slope]
        try:
            exp_p, exp_cov, exp_r = _fit(_exponential, gains, means, errors, p0=p0)
            if np.all(np.isfinite(exp_p)) and exp_r < lin_r:
                best = ("exponential", exp_p, exp_cov, exp_r)
        except RuntimeError as exc:
            diagnostic = f"exponential fit failed: {exc}"
    else:
        diagnostic = "data change sign; exponential model skipped"
    model, params, cov, resid = best
    var = float(cov[0, 0]) if np.all(np.isfinite(cov)) else float("nan")
    return ZneFit(
        gains, means, errors, model, np.asarray(params), float(params[0]),
        math.sqrt(max(var, 0.0)), resid, diagnostic,
    )


# ---------------------------------------------------------------------------
# End-to-end pipeline


@dataclass(frozen=True)
class NoisyRun:
    """Per-gain averages of ``<Z_q>`` over twirled instances."""

    gains: tuple[float, ...]
    means: np.ndarray  # (gains, qubits)
    stderrs: np.ndarray
    instances: int
    shots: int


def simulate_noisy(
    rho0: np.ndarray,
    moments: Sequence[Moment],
    model: PauliLindbladModel | None,
    gain: float = 1.0,
    twirl_seed=None,
) -> np.ndarray:
    """Final density matrix; noise ``Lambda^gain`` follows every (optionally twirled) CNOT layer."""
    n = int(round(math.log2(rho0.shape[0])))
    _check_size(n)
    rng = None if twirl_seed is None else np.random.default_rng(twirl_seed)
    if model is None or gain == 0.0:
        noise = None
    elif n <= SUPEROPERATOR_MAX_QUBITS:
        sup = channel_superoperator(model, float(gain))
        shape = rho0.shape

        def noise(x):
            return (sup @ x.ravel()).reshape(shape)
    else:
        def noise(x):
            return apply_channel(x, model, gain)

    rho = np.array(rho0, dtype=complex)
    for m in moments:
        if isinstance(m, SingleMoment):
            u = single_moment_matrix(n, m)
            rho = u @ rho @ u.conj().T
            continue
        u = cnot_layer_matrix(n, m)
        tw = twirl_layer(m, n, seed=rng) if rng is not None else None
        if tw is not None:
            rho = pauli_conjugate(rho, tw.before)
        rho = u @ rho @ u.conj().T
        if noise is not None:
            rho = noise(rho)
        if tw is not None:
            rho = pauli_conjugate(rho, tw.after)
    return rho


def run_zne_experiment(
    initial_state: np.ndarray,
    program: GateProgram,
    model: PauliLindbladModel,
    gains: Sequence[float] = (1.0, 2.0, 2.5),
    instances: int = 300,
    shots: int = 1024,
    readout: ReadoutModel | None = None,
    seed: int = 0,
    threads: int = 1,
) -> NoisyRun:
    """Twirled, shot-sampled ``<Z_q>`` at each gain; per-instance seeds spawn from ``seed``."""
    n = program.n_qubits
    _check_size(n)
    readout = readout or ReadoutModel()
    moments = lower_program(program)
    psi = np.asarray(initial_state, dtype=complex)
    rho0 = np.outer(psi, psi.conj())
    root = np.random.SeedSequence(seed)
    gain_seqs = root.spawn(len(gains))

    def one(args):
        gain, ss = args
        tw_seed, ro_seed = ss.spawn(2)
        rho = simulate_noisy(rho0, moments, model, gain, twirl_seed=tw_seed)
        z = readout_twirl(np.real(np.diag(rho)), n, shots, readout, seed=ro_seed)
        return z / readout.contrast

    means, errs = [], []
    for gain, gs in zip(gains, gain_seqs):
        jobs = [(gain, ss) for ss in gs.spawn(instances)]
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                vals = np.array(list(pool.map(one, jobs)))
        else:
            vals = np.array([one(j) for j in jobs])
        means.append(vals.mean(axis=0))
        errs.append(vals.std(axis=0, ddof=1) / math.sqrt(instances))
    return NoisyRun(tuple(float(g) for g in gains), np.array(means), np.array(errs), instances, shots)


def extrapolate_run(run: NoisyRun) -> list[ZneFit]:
    return [zne_extrapolate(run.gains, run.means[:, q], run.stderrs[:, q]) for q in range(run.means.shape[1])]


def density_fit(fit: ZneFit) -> tuple[float, float]:
    """Occupation ``(1 - <Z>)/2`` and its standard error from a ``<Z>`` fit."""
    return (1 - fit.value) / 2, fit.stderr / 2


def zne_csv(run: NoisyRun, fits: Sequence[ZneFit] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["observable", "gain", "mean", "stderr"])
    for q in range(run.means.shape[1]):
        for i, g in enumerate(run.gains):
            writer.writerow([f"Z{q}", repr(g), repr(float(run.means[i, q])), repr(float(run.stderrs[i, q]))])
    for q, fit in enumerate(fits or []):
        buf.write(
            f"# fit Z{q} model={fit.model} value={fit.value!r} stderr={fit.stderr!r} "
            f"residual={fit.residual!r}\n"
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Learning fixture


@dataclass(frozen=True)
class LearningData:
    depths: tuple[int, ...]
    observables: tuple[str, ...]
    fidelities: np.ndarray  # (observables, depths)


def learning_fixture(
    model: PauliLindbladModel,
    depths: Sequence[int] = (0, 4, 16),
    samples: int = 16,
    shots: int = 1024,
    seed: int = 0,
) -> LearningData:
    """Repeated noisy identity layers probed with one- and two-local Paulis.

    Each ``(observable, depth)`` point averages ``samples`` shot-limited estimates
    of ``<P>`` after preparing its +1 eigenstate.
    """
    n = model.n_qubits
    _check_size(n)
    rng = np.random.default_rng(seed)
    probes = sorted({s for s, _ in model.terms} | {_pad(n, {q: p}) for q in range(n) for p in "XYZ"})
    fids = np.zeros((len(probes), len(depths)))
    for i, s in enumerate(probes):
        for j, d in enumerate(depths):
            f = model.pauli_fidelity(s, gain=d)
            # +1/-1 outcomes with mean f
            est = rng.binomial(shots, (1 + f) / 2, size=samples) * 2.0 / shots - 1.0
            fids[i, j] = est.mean()
    return LearningData(tuple(depths), tuple(probes), fids)


def _pad(n: int, ops: dict[int, str]) -> str:
    return "".join(ops.get(q, "I") for q in range(n))


def learn_rates(data: LearningData, model_strings: Sequence[str]) -> np.ndarray:
    """Non-negative least-squares rates from the decay ``f_P(d) = exp(-2 d sum lam_k)``."""
    rows, rhs = [], []
    for s, f in zip(data.observables, data.fidelities):
        for d, val in zip(data.depths, f):
            if d == 0 or val <= 0:
                continue
            f0 = f[data.depths.index(0)] if 0 in data.depths else 1.0
            rows.append([2.0 * d * (0 if _commutes(p, s) else 1) for p in model_strings])
            rhs.append(-math.log(val / max(f0, 1e-12)))
    rates, _ = nnls(np.array(rows), np.array(rhs))
    return rates


__all__ = [
    "PauliLindbladModel",
    "local_model",
    "apply_channel",
    "lower_program",
    "twirl_layer",
    "readout_twirl",
    "ReadoutModel",
    "zne_extrapolate",
    "ZneFit",
    "run_zne_experiment",
]
