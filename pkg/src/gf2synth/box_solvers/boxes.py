"""Local solves: closed-form two-qubit boxes and table-driven Problems 1-3."""

from __future__ import annotations

from ..cnot_circuit import CnotCircuit, CnotGate, simulate
from ..gf2_core import BitMatrix, SingularMatrixError, is_invertible, rank
from .tables import DepthTable, TableLookupError

_UPPER = BitMatrix.from_lists([[1, 1], [0, 1]])
_ID2 = BitMatrix.identity(2)


def box_p1_closed(b: BitMatrix) -> CnotCircuit:
    """Two-qubit box that swaps the labels of adjacent rows during the first sweep.

    ``b`` is the ``2 x 2`` submatrix on the two rows and their two labels;
    the result ``C`` makes ``C b = [[*, 1], [1, 0]]``.

    Raises:
        ValueError: if ``b`` is neither ``[[1, 1], [0, 1]]`` nor the identity.
    """
    if b == _UPPER:
        return CnotCircuit(2, (CnotGate(0, 1),))
    if b == _ID2:
        return CnotCircuit(2, (CnotGate(1, 0), CnotGate(0, 1)))
    raise ValueError(f"unexpected first-sweep box input {b!r}")


def box_p2_closed(b: BitMatrix, labels_ordered: bool) -> CnotCircuit:
    """Two-qubit box of the second sweep: ``C b`` becomes the swap ``[[0, 1], [1, 0]]``.

    Nothing is done when the labels are already in order (``b`` is then the
    identity).
    """
    if labels_ordered:
        if b != _ID2:
            raise ValueError(f"ordered labels require the identity, got {b!r}")
        return CnotCircuit(2)
    if b == _UPPER:
        return CnotCircuit(2, (CnotGate(0, 1), CnotGate(1, 0)))
    if b == _ID2:
        return CnotCircuit(2, (CnotGate(0, 1), CnotGate(1, 0), CnotGate(0, 1)))
    raise ValueError(f"unexpected second-sweep box input {b!r}")


Layers = list[tuple[CnotGate, ...]]


def layers_to_circuit(n: int, layers: Layers) -> CnotCircuit:
    return CnotCircuit(n, tuple(g for layer in layers for g in layer))


def circuit_to_layers(c: CnotCircuit) -> Layers:
    from ..cnot_circuit import layers as asap_layers

    return [tuple(layer) for layer in asap_layers(c)]


def _check_table(table: DepthTable, problem: str):
    if table.problem != problem:
        raise ValueError(f"expected a {problem} table, got {table.problem}")


def p1_layers(b: BitMatrix, table: DepthTable) -> Layers:
    _check_table(table, "P1")
    p = table.p
    if b.shape != (2 * p, p):
        raise ValueError(f"Problem 1 needs a {2 * p}x{p} matrix, got {b.shape}")
    if rank(b) != p:
        raise SingularMatrixError("Problem 1 input is not full rank")
    return table.layers(table.local.key_of(b))


def solve_p1(b: BitMatrix, table: DepthTable) -> CnotCircuit:
    """Layered circuit ``C`` with ``C b = [B3; 0]``, ``B3`` invertible.

    Its depth equals the table depth of the reduced column-echelon form of ``b``.
    """
    return layers_to_circuit(2 * table.p, p1_layers(b, table))


def check_p2_instance(b: BitMatrix, p: int) -> None:
    """Raise ``ValueError`` unless ``b = [B1 B3; B2 0]`` with ``B2``, ``B3`` invertible."""
    if b.shape != (2 * p, 2 * p):
        raise ValueError(f"Problem 2 needs a {2 * p}x{2 * p} matrix, got {b.shape}")
    top, bottom = list(range(p)), list(range(p, 2 * p))
    if any(b.submatrix(bottom, bottom).rows):
        raise ValueError("Problem 2 input must have a zero lower-right block")
    if not is_invertible(b.submatrix(bottom, top)) or not is_invertible(b.submatrix(top, bottom)):
        raise ValueError("Problem 2 input needs invertible off-diagonal blocks")


def p2_layers(b: BitMatrix, table: DepthTable) -> Layers:
    _check_table(table, "P2")
    check_p2_instance(b, table.p)
    key = table.local.key_of(b)
    try:
        return table.layers(key)
    except TableLookupError:
        raise TableLookupError("Problem 2 instance missing from table (corrupt cache?)") from None


def solve_p2(b: BitMatrix, table: DepthTable) -> CnotCircuit:
    """Layered circuit ``C`` with ``C b`` block diagonal (invertible diagonal blocks)."""
    return layers_to_circuit(2 * table.p, p2_layers(b, table))


def p3_layers(a: BitMatrix, table: DepthTable) -> Layers:
    _check_table(table, "P3")
    if not is_invertible(a):
        raise SingularMatrixError("Problem 3 input is singular")
    return table.layers(table.local.key_of(a))


def solve_p3(a: BitMatrix, table: DepthTable) -> CnotCircuit:
    """Layered circuit ``C`` with ``C a = I``."""
    return layers_to_circuit(table.p, p3_layers(a, table))


def block_diagonal_ok(m: BitMatrix, p: int) -> bool:
    top, bottom = list(range(p)), list(range(p, 2 * p))
    return (
        not any(m.submatrix(top, bottom).rows)
        and not any(m.submatrix(bottom, top).rows)
        and is_invertible(m.submatrix(top, top))
        and is_invertible(m.submatrix(bottom, bottom))
    )


def p1_solved(m: BitMatrix, p: int) -> bool:
    """``m`` (``2p x p``) has a zero bottom half and an invertible top half."""
    return not any(m.rows[p:]) and is_invertible(BitMatrix(m.rows[:p], p))


def apply(c: CnotCircuit, m: BitMatrix) -> BitMatrix:
    return simulate(c) @ m
