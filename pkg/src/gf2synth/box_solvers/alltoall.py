"""Analytic Problem-1/2 solvers for blocks with full connectivity between neighbours.

Local qubits ``0..p-1`` form the upper block and ``p..2p-1`` the lower one.
For ``[A1; A2]`` with ``A1`` invertible, write ``B = A2 A1^-1``.  Then

* CNOT(upper ``i`` -> lower ``j``) flips ``B[j, i]``;
* CNOT(lower ``j'`` -> lower ``j``) adds row ``j'`` of ``B`` to row ``j``;
* CNOT(upper ``i'`` -> upper ``i``) adds column ``i`` of ``B`` to column ``i'``.

Zeroing ``B`` zeroes ``A2`` while keeping ``A1`` invertible.
"""

from __future__ import annotations

import logging
import math

from ..cnot_circuit import CnotCircuit, CnotGate
from ..gf2_core import BitMatrix, SingularMatrixError, inverse, is_invertible, mat_mul, rank
from .boxes import Layers, check_p2_instance, layers_to_circuit

log = logging.getLogger(__name__)

MODES = ("basic", "improved")


def matching_decomposition(b: BitMatrix) -> list[list[tuple[int, int]]]:
    """Split the ones of ``b`` into partial permutations (proper edge colouring).

    Uses the alternating-path proof of Koenig's theorem: the number of layers
    equals the maximum row or column weight of ``b``.

    Returns:
        One list of ``(row, col)`` entries per layer; no layer repeats a row or
        a column and the layers XOR to ``b``.
    """
    n_rows, n_cols = b.shape
    edges = [(i, j) for i in range(n_rows) for j in range(n_cols) if b[i, j]]
    if not edges:
        return []
    degree = max(
        max((bin(r).count("1") for r in b.rows), default=0),
        max((bin(c).count("1") for c in b.columns()), default=0),
    )
    # colour_at[side][vertex][colour] = neighbour on the other side, or None
    at_row = [[None] * degree for _ in range(n_rows)]
    at_col = [[None] * degree for _ in range(n_cols)]
    for i, j in edges:
        a = next(c for c in range(degree) if at_row[i][c] is None)
        g = next(c for c in range(degree) if at_col[j][c] is None)
        if at_col[j][a] is not None:
            # Swap colours a and g along the alternating path starting at column j.
            path = []
            side, v, colour = "col", j, a
            while True:
                nxt = (at_col if side == "col" else at_row)[v][colour]
                if nxt is None:
                    break
                path.append((side, v, nxt, colour))
                side = "row" if side == "col" else "col"
                v = nxt
                colour = g if colour == a else a
            for side, v, w, colour in path:
                if side == "col":
                    at_col[v][colour] = None
                    at_row[w][colour] = None
                else:
                    at_row[v][colour] = None
                    at_col[w][colour] = None
            for side, v, w, colour in path:
                other = g if colour == a else a
                if side == "col":
                    at_col[v][other] = w
                    at_row[w][other] = v
                else:
                    at_row[v][other] = w
                    at_col[w][other] = v
        at_row[i][a] = j
        at_col[j][a] = i
    layers = [[] for _ in range(degree)]
    for i in range(n_rows):
        for c in range(degree):
            if at_row[i][c] is not None:
                layers[c].append((i, at_row[i][c]))
    return [sorted(layer) for layer in layers if layer]


class _Work:
    """A ``2p x w`` local matrix with its applied layers."""

    def __init__(self, b: BitMatrix, p: int):
        self.p = p
        self.rows = list(b.rows)
        self.width = b.n_cols
        self.layers: Layers = []

    def apply(self, gates: list[CnotGate]):
        if not gates:
            return
        for g in gates:
            self.rows[g.target] ^= self.rows[g.control]
        self.layers.append(tuple(sorted(gates, key=lambda g: (g.control, g.target))))

    def top(self, cols: list[int]) -> BitMatrix:
        return BitMatrix(self.rows[: self.p], self.width).submatrix(range(self.p), cols)

    def bottom(self, cols: list[int]) -> BitMatrix:
        return BitMatrix(self.rows[self.p:], self.width).submatrix(range(self.p), cols)

    def b_matrix(self, cols: list[int]) -> BitMatrix:
        return mat_mul(self.bottom(cols), inverse(self.top(cols)))


def _repair_layer(a1: BitMatrix, a2: BitMatrix, p: int) -> list[CnotGate]:
    """One layer of lower -> upper CNOTs that makes ``A1`` invertible.

    Keep a maximal independent set ``S`` of ``A1`` rows, complete it to a basis
    with rows ``T`` of ``A2`` and add one row of ``T`` into each remaining
    (dependent) ``A1`` row.  Each dependent row lies in ``span(S)``, so the new
    rows span ``span(S + T)``, the whole space.
    """
    basis: list[int] = []

    def independent(v: int) -> bool:
        red = v
        for piv in basis:
            red = min(red, red ^ piv)
        return red != 0

    def add(v: int):
        red = v
        for piv in basis:
            red = min(red, red ^ piv)
        basis.append(red)
        basis.sort(reverse=True)

    dependent = []
    for i, row in enumerate(a1.rows):
        if independent(row):
            add(row)
        else:
            dependent.append(i)
    chosen = []
    for j, row in enumerate(a2.rows):
        if len(chosen) == len(dependent):
            break
        if independent(row):
            add(row)
            chosen.append(j)
    if len(chosen) != len(dependent):
        raise SingularMatrixError("Problem 1 input is not full rank")
    return [CnotGate(p + j, i) for i, j in zip(dependent, chosen)]


def _flip_layers(work: _Work, b: BitMatrix):
    """Zero the entries of ``B`` given as ``b`` with upper -> lower CNOTs."""
    p = work.p
    for layer in matching_decomposition(b):
        work.apply([CnotGate(i_col, p + j_row) for j_row, i_col in layer])


def _weight_split(b: BitMatrix, p: int):
    """Find ``v1``, ``v2`` with ``B' = B + 1 v1^T + v2 1^T`` of row/column weight <= p // 2."""
    limit = p // 2
    for v2 in range(1 << p):
        rows = [r ^ ((1 << p) - 1 if (v2 >> j) & 1 else 0) for j, r in enumerate(b.rows)]
        v1 = 0
        for i in range(p):
            ones = sum((r >> i) & 1 for r in rows)
            if 2 * ones > p:
                v1 |= 1 << i
        rows = [r ^ v1 for r in rows]
        bp = BitMatrix(rows, p)
        if max(bin(r).count("1") for r in rows) <= limit and max(bin(c).count("1") for c in bp.columns()) <= limit:
            return v1, v2, bp
    return None


def _halving_rounds(groups: list[list[int]]) -> list[list[tuple[int, int]]]:
    """Pairwise elimination schedule: each round maps surviving ``keep`` to zeroed ``drop``."""
    rounds = []
    groups = [list(g) for g in groups]
    while any(len(g) > 1 for g in groups):
        pairs = []
        for g in groups:
            survivors = []
            for k in range(0, len(g) - 1, 2):
                pairs.append((g[k], g[k + 1]))
                survivors.append(g[k])
            if len(g) % 2:
                survivors.append(g[-1])
            g[:] = survivors
        rounds.append(pairs)
    return rounds


def _zero_b_basic(work: _Work, cols: list[int]):
    _flip_layers(work, work.b_matrix(cols))


def _zero_b_improved(work: _Work, cols: list[int]) -> bool:
    p = work.p
    b = work.b_matrix(cols)
    split = _weight_split(b, p)
    if split is None:
        return False
    v1, v2, bp = split
    _flip_layers(work, bp)
    # B is now w1 w2^T with w1 = [1 v2] (per lower row), w2 = [v1 1] (per upper column).
    row_groups = [[j for j in range(p) if not (v2 >> j) & 1], [j for j in range(p) if (v2 >> j) & 1]]
    col_groups = [[i for i in range(p) if not (v1 >> i) & 1], [i for i in range(p) if (v1 >> i) & 1]]
    row_rounds = _halving_rounds(row_groups)
    col_rounds = _halving_rounds(col_groups)
    for k in range(max(len(row_rounds), len(col_rounds))):
        gates = []
        if k < len(row_rounds):
            # row `drop` of B += row `keep`: CNOT lower keep -> lower drop
            gates += [CnotGate(p + keep, p + drop) for keep, drop in row_rounds[k]]
        if k < len(col_rounds):
            # column `drop` of B += column `keep`: CNOT upper drop -> upper keep
            gates += [CnotGate(drop, keep) for keep, drop in col_rounds[k]]
        work.apply(gates)
    _flip_layers(work, work.b_matrix(cols))
    return True


def _solve_lower(work: _Work, cols: list[int], mode: str, keep_shallower: bool):
    if mode == "basic":
        _zero_b_basic(work, cols)
        return
    trial = _Work(BitMatrix(work.rows, work.width), work.p)
    ok = _zero_b_improved(trial, cols)
    if not ok:
        log.warning("weight split not found for p=%d; using the matching construction", work.p)
    if ok and not keep_shallower:
        best = trial
    else:
        basic = _Work(BitMatrix(work.rows, work.width), work.p)
        _zero_b_basic(basic, cols)
        best = trial if ok and len(trial.layers) <= len(basic.layers) else basic
    work.rows = best.rows
    work.layers += best.layers


def _check_mode(mode: str):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def alltoall_p1_layers(b: BitMatrix, mode: str = "basic", keep_shallower: bool = True) -> Layers:
    _check_mode(mode)
    if b.n_rows % 2 or b.n_rows != 2 * b.n_cols:
        raise ValueError(f"Problem 1 needs a 2p x p matrix, got {b.shape}")
    p = b.n_cols
    if rank(b) != p:
        raise SingularMatrixError("Problem 1 input is not full rank")
    work = _Work(b, p)
    cols = list(range(p))
    a1 = work.top(cols)
    if not is_invertible(a1):
        work.apply(_repair_layer(a1, work.bottom(cols), p))
    _solve_lower(work, cols, mode, keep_shallower)
    assert not any(work.rows[p:]), "lower block not cleared"
    return work.layers


def alltoall_solve_p1(b: BitMatrix, mode: str = "basic") -> CnotCircuit:
    """Problem 1 with full connectivity between the two blocks.

    ``basic``: depth at most ``1 + p``.  ``improved``: at most
    ``3 + p // 2 + ceil(log2 p)``; the shallower of both constructions is kept
    (use :func:`alltoall_p1_layers` with ``keep_shallower=False`` to force it).
    """
    return layers_to_circuit(b.n_rows, alltoall_p1_layers(b, mode))


def alltoall_p2_layers(b: BitMatrix, mode: str = "basic", keep_shallower: bool = True) -> Layers:
    _check_mode(mode)
    if b.n_rows != b.n_cols or b.n_rows % 2:
        raise ValueError(f"Problem 2 needs a 2p x 2p matrix, got {b.shape}")
    p = b.n_rows // 2
    check_p2_instance(b, p)
    work = _Work(b, p)
    work.apply([CnotGate(i, p + i) for i in range(p)])
    work.apply([CnotGate(p + i, i) for i in range(p)])
    # now [A2 0; A1+A2 A3]: clear the lower-left block against the upper-left one
    _solve_lower(work, list(range(p)), mode, keep_shallower)
    assert not any(r & ((1 << p) - 1) for r in work.rows[p:]), "lower-left block not cleared"
    return work.layers


def alltoall_solve_p2(b: BitMatrix, mode: str = "basic") -> CnotCircuit:
    """Problem 2 with full connectivity: depth at most ``2 + p`` (basic) or ``4 + p // 2 + ceil(log2 p)``."""
    return layers_to_circuit(b.n_rows, alltoall_p2_layers(b, mode))


def p1_bound(p: int, mode: str) -> int:
    if mode == "basic":
        return 1 + p
    return 3 + p // 2 + math.ceil(math.log2(p)) if p > 1 else 3


def p2_bound(p: int, mode: str) -> int:
    return p1_bound(p, mode) + 1
