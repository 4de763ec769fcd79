"""CNOT circuits: simulation over GF(2), ASAP depth, connectivity checks, text I/O."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

from .gf2_core import BitMatrix

if TYPE_CHECKING:
    from .topology import ConnectivityGraph


@dataclass(frozen=True, order=True)
class CnotGate:
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError(f"CNOT needs distinct qubits, got {self.control} twice")
        if self.control < 0 or self.target < 0:
            raise ValueError("qubit indices must be non-negative")


@dataclass(frozen=True)
class CnotCircuit:
    """Ordered CNOT gate list; gate 0 is applied first."""

    n_qubits: int
    gates: tuple[CnotGate, ...] = field(default=())

    def __post_init__(self):
        gates = tuple(g if isinstance(g, CnotGate) else CnotGate(*g) for g in self.gates)
        object.__setattr__(self, "gates", gates)
        for g in gates:
            if g.control >= self.n_qubits or g.target >= self.n_qubits:
                raise ValueError(f"gate {g} out of range for {self.n_qubits} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: CnotCircuit) -> CnotCircuit:
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate circuits of different widths")
        return CnotCircuit(self.n_qubits, self.gates + other.gates)

    def to_text(self) -> str:
        lines = [f"qubits {self.n_qubits}"]
        lines += [f"CNOT {g.control} {g.target}" for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> CnotCircuit:
        n = None
        gates = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 2 or parts[0] != "qubits":
                    raise ValueError(f"line {lineno}: expected 'qubits <n>' header")
                n = int(parts[1])
                continue
            if len(parts) != 3 or parts[0] != "CNOT":
                raise ValueError(f"line {lineno}: expected 'CNOT <control> <target>'")
            gates.append(CnotGate(int(parts[1]), int(parts[2])))
        if n is None:
            raise ValueError("missing 'qubits <n>' header")
        return cls(n, tuple(gates))


def simulate(c: CnotCircuit) -> BitMatrix:
    """The linear operator implemented by ``c`` (row ops applied to the identity)."""
    rows = [1 << i for i in range(c.n_qubits)]
    for g in c.gates:
        rows[g.target] ^= rows[g.control]
    return BitMatrix(rows, c.n_qubits)


def apply_gates(rows: list[int], gates: Iterable[CnotGate]) -> None:
    """Apply gates as row operations to a mutable row list, in place."""
    for g in gates:
        rows[g.target] ^= rows[g.control]


def gate_layers(c: CnotCircuit) -> list[int]:
    """ASAP layer index (1-based) of every gate."""
    last = [0] * c.n_qubits
    out = []
    for g in c.gates:
        layer = 1 + max(last[g.control], last[g.target])
        last[g.control] = last[g.target] = layer
        out.append(layer)
    return out


def depth(c: CnotCircuit) -> int:
    return max(gate_layers(c), default=0)


def layers(c: CnotCircuit) -> list[list[CnotGate]]:
    """Gates grouped by ASAP layer."""
    groups: list[list[CnotGate]] = []
    for g, k in zip(c.gates, gate_layers(c)):
        while len(groups) < k:
            groups.append([])
        groups[k - 1].append(g)
    return groups


def reverse(c: CnotCircuit) -> CnotCircuit:
    return CnotCircuit(c.n_qubits, c.gates[::-1])


def check_compliance(c: CnotCircuit, g: ConnectivityGraph) -> list[tuple[int, CnotGate]]:
    """List of ``(gate index, gate)`` pairs whose qubits are not adjacent in ``g``."""
    if c.n_qubits != g.n:
        raise ValueError(f"circuit has {c.n_qubits} qubits, graph has {g.n}")
    return [(k, gate) for k, gate in enumerate(c.gates) if not g.has_edge(gate.control, gate.target)]


def circuit_from_pairs(n: int, pairs: Sequence[tuple[int, int]]) -> CnotCircuit:
    return CnotCircuit(n, tuple(CnotGate(a, b) for a, b in pairs))
