"""Gate programs built from phase gates, nearest-neighbour Givens gates and Pauli markers.

Gate semantics (``n_q`` is the occupation of qubit ``q``):

* ``RZ q b``        ``exp(i b n_q)`` = diag(1, e^{ib})
* ``GIV q q+1 t``   ``exp(t (xi_q^dag xi_{q+1} - xi_{q+1}^dag xi_q))``
* ``GIV N-1 0 t``   the same rotation on the ring-closing pair, acting on the
                    qubits directly (no Jordan-Wigner string); qubit ``N-1``
                    plays the role of ``q``
* ``PX/PY/PZ q``    Pauli on ``q``
* ``SP q / SM q``   non-unitary ``sigma^+ = |0><1|`` / ``sigma^- = |1><0|``
* ``BARRIER``       scheduling fence
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SINGLE_KINDS = ("RZ", "PX", "PY", "PZ", "SP", "SM")
MARKERS = ("PX", "PY", "PZ", "SP", "SM")
NON_UNITARY = ("SP", "SM")


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...] = ()
    param: float = 0.0

    def __post_init__(self):
        if self.kind == "GIV":
            if len(self.qubits) != 2 or not (
                self.qubits[1] == self.qubits[0] + 1 or (self.qubits[1] == 0 and self.qubits[0] >= 2)
            ):
                raise ValueError(f"GIV acts on an adjacent ascending pair or (N-1, 0), got {self.qubits}")
        elif self.kind in SINGLE_KINDS:
            if len(self.qubits) != 1:
                raise ValueError(f"{self.kind} acts on one qubit, got {self.qubits}")
        elif self.kind == "BARRIER":
            if self.qubits:
                raise ValueError("BARRIER takes no qubits")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind == "GIV"

    @property
    def is_unitary(self) -> bool:
        return self.kind not in NON_UNITARY

    @property
    def is_ring(self) -> bool:
        return self.kind == "GIV" and self.qubits[1] == 0

    def inverse(self) -> "Gate":
        if self.kind in ("RZ", "GIV"):
            return Gate(self.kind, self.qubits, -self.param)
        if self.kind in NON_UNITARY:
            raise ValueError(f"{self.kind} has no inverse")
        return self

    def to_text(self) -> str:
        if self.kind == "BARRIER":
            return "BARRIER"
        qs = " ".join(str(q) for q in self.qubits)
        if self.kind in ("RZ", "GIV"):
            return f"{self.kind} {qs} {float(self.param)!r}"
        return f"{self.kind} {qs}"


def giv(q: int, theta: float) -> Gate:
    return Gate("GIV", (q, q + 1), float(theta))


def ring_giv(n_qubits: int, theta: float) -> Gate:
    return Gate("GIV", (n_qubits - 1, 0), float(theta))


def rz(q: int, beta: float) -> Gate:
    return Gate("RZ", (q,), float(beta))


def marker(kind: str, q: int) -> Gate:
    return Gate(kind, (q,))


@dataclass(frozen=True)
class GateProgram:
    """Immutable gate list. ``layers`` (optional) gives the two-qubit layer of each gate."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()
    layers: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise IndexError(f"gate {g.to_text()} outside {self.n_qubits} qubits")
            if g.is_ring and g.qubits[0] != self.n_qubits - 1:
                raise ValueError(f"ring pair must be ({self.n_qubits - 1}, 0), got {g.qubits}")
        if self.layers is not None and len(self.layers) != len(self.gates):
            raise ValueError("layer metadata length mismatch")

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "GateProgram") -> "GateProgram":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        return GateProgram(self.n_qubits, self.gates + other.gates)

    @property
    def is_unitary(self) -> bool:
        return all(g.is_unitary for g in self.gates)

    def inverse(self) -> "GateProgram":
        return GateProgram(
            self.n_qubits, tuple(g.inverse() for g in reversed(self.gates) if g.kind != "BARRIER")
        )

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def without_markers(self) -> "GateProgram":
        return GateProgram(self.n_qubits, tuple(g for g in self.gates if g.kind not in MARKERS))

    def mirrored(self) -> "GateProgram":
        """Relabel qubit ``q -> N-1-q``; maps ``V(u)`` to ``V(P u P)`` with ``P`` the site reversal."""
        n = self.n_qubits
        out = []
        for g in self.gates:
            if g.is_ring:
                out.append(Gate("GIV", g.qubits, -g.param))
            elif g.kind == "GIV":
                out.append(giv(n - 2 - g.qubits[0], -g.param))
            elif g.kind == "BARRIER":
                out.append(g)
            else:
                out.append(Gate(g.kind, (n - 1 - g.qubits[0],), g.param))
        return GateProgram(n, tuple(out))

    def to_text(self) -> str:
        return f"# qubits {self.n_qubits}\n" + "".join(g.to_text() + "\n" for g in self.gates)

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None) -> "GateProgram":
        gates = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "qubits" and n_qubits is None:
                    n_qubits = int(parts[1])
                continue
            tok = line.split()
            kind = tok[0]
            if kind == "BARRIER":
                gates.append(Gate("BARRIER"))
            elif kind == "GIV":
                gates.append(Gate("GIV", (int(tok[1]), int(tok[2])), float(tok[3])))
            elif kind == "RZ":
                gates.append(Gate("RZ", (int(tok[1]),), float(tok[2])))
            else:
                gates.append(Gate(kind, (int(tok[1]),)))
        if n_qubits is None:
            n_qubits = 1 + max((q for g in gates for q in g.qubits), default=0)
        return cls(n_qubits, tuple(gates))


def schedule_layers(program: GateProgram, fuse_phases: bool = True) -> GateProgram:
    """Greedy as-soon-as-possible packing of Givens gates into layers.

    Single-qubit gates ride in front of the next two-qubit layer on their qubit,
    so per-qubit order is kept. Adjacent ``RZ`` gates on one qubit are merged.
    """
    n = program.n_qubits
    free = [0] * n
    # slot -> (list of single-qubit gates, list of two-qubit gates)
    slots: dict[int, tuple[list[Gate], list[Gate]]] = {}
    last_single: dict[int, tuple[int, int]] = {}

    def slot(i: int):
        return slots.setdefault(i, ([], []))

    for g in program.gates:
        if g.kind == "BARRIER":
            top = max(free) if free else 0
            free = [top] * n
            last_single.clear()
            continue
        if g.is_two_qubit:
            a, b = g.qubits
            layer = max(free[a], free[b])
            slot(layer)[1].append(g)
            free[a] = free[b] = layer + 1
            last_single.pop(a, None)
            last_single.pop(b, None)
            continue
        q = g.qubits[0]
        layer = free[q]
        singles = slot(layer)[0]
        prev = last_single.get(q)
        if (
            fuse_phases
            and g.kind == "RZ"
            and prev is not None
            and prev[0] == layer
            and singles[prev[1]].kind == "RZ"
        ):
            merged = singles[prev[1]].param + g.param
            singles[prev[1]] = rz(q, merged)
            continue
        singles.append(g)
        last_single[q] = (layer, len(singles) - 1)

    gates: list[Gate] = []
    layers: list[int] = []
    for i in sorted(slots):
        singles, doubles = slots[i]
        for g in singles:
            if g.kind == "RZ" and g.param == 0.0:
                continue
            gates.append(g)
            layers.append(i)
        for g in doubles:
            gates.append(g)
            layers.append(i)
    return GateProgram(n, tuple(gates), tuple(layers))


def givens_depth(program: GateProgram) -> int:
    """Number of layers containing at least one Givens gate after scheduling."""
    sched = program if program.layers is not None else schedule_layers(program)
    used = {layer for g, layer in zip(sched.gates, sched.layers) if g.is_two_qubit}
    return len(used)


def cnot_depth(program: GateProgram) -> int:
    """Entangling depth counted in CNOTs; each Givens gate expands to two."""
    return 2 * givens_depth(program)


def lightcone_prune(program: GateProgram, observable_sites: int | Iterable[int]) -> GateProgram:
    """Drop gates with no causal path to the measured qubit(s); requires a unitary program."""
    if not program.is_unitary:
        raise ValueError("light-cone pruning is only sound for unitary programs")
    if isinstance(observable_sites, (int, np.integer)):
        observable_sites = [int(observable_sites)]
    active = set(observable_sites)
    kept = []
    for g in reversed(program.gates):
        if g.kind == "BARRIER":
            continue
        if any(q in active for q in g.qubits):
            kept.append(g)
            if g.is_two_qubit:
                active.update(g.qubits)
    return GateProgram(program.n_qubits, tuple(reversed(kept)))


def layer_table(program: GateProgram) -> list[list[Gate]]:
    """Gates grouped by layer index (scheduling first if needed)."""
    sched = program if program.layers is not None else schedule_layers(program)
    out: dict[int, list[Gate]] = {}
    for g, layer in zip(sched.gates, sched.layers):
        out.setdefault(layer, []).append(g)
    return [out[i] for i in sorted(out)]


def concatenate(n_qubits: int, parts: Sequence[GateProgram | Gate]) -> GateProgram:
    gates: list[Gate] = []
    for p in parts:
        if isinstance(p, Gate):
            gates.append(p)
        else:
            gates.extend(p.gates)
    return GateProgram(n_qubits, tuple(gates))
