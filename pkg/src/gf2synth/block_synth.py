"""Block synthesis of CNOT circuits on block-line architectures.

The operator is first split as ``A = V N`` with ``V`` upper triangular up to a
column permutation and ``N`` north-west triangular.  A first sorting sweep
reduces ``V`` to block upper triangular form while the same gates turn ``A``
block north-west triangular.  A second sweep makes ``A`` block diagonal and a
final parallel pass reduces each diagonal block to the identity.  The gates
found reduce ``A`` to ``I``; reversed, they implement ``A``.

All matrices inside the driver are indexed by *positions*: position ``k``
holds qubit ``layout.order[k]``, so that block ``i`` occupies positions
``[i p, (i + 1) p)``.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from .box_solvers.boxes import Layers
from .box_solvers.solvers import ClosedFormLine, LocalSolvers, solvers_for
from .cnot_circuit import CnotCircuit, CnotGate, apply_gates, layers
from .gf2_core import BitMatrix, SingularMatrixError, is_invertible, upl_decompose
from .topology import BlockLineLayout, line

log = logging.getLogger(__name__)


class InvariantViolation(AssertionError):
    """Raised in debug mode when a sweep breaks its invariant."""


@dataclass
class LabeledOperator:
    """A matrix whose rows carry sorting labels, read blockwise in groups of ``p``."""

    a: BitMatrix
    labels: list[int]
    p: int = 1

    def __post_init__(self):
        self.labels = list(self.labels)
        n = self.a.n_rows
        if not self.a.is_square():
            raise ValueError("labeled operator must be square")
        if self.p < 1 or n % self.p:
            raise ValueError(f"block size {self.p} does not divide {n}")
        if sorted(self.labels) != list(range(n)):
            raise ValueError("labels must be a permutation of 0..n-1")

    @property
    def m(self) -> int:
        return self.a.n_rows // self.p

    def block_rows(self, i: int) -> list[int]:
        return list(range(i * self.p, (i + 1) * self.p))

    def block_labels(self, i: int) -> list[int]:
        return sorted(self.labels[r] for r in self.block_rows(i))


@dataclass(frozen=True)
class SortingNetwork:
    """Rounds of disjoint adjacent compare-exchange pairs ``(i, i + 1)``."""

    m: int
    rounds: tuple[tuple[tuple[int, int], ...], ...]

    def sort(self, values: Sequence) -> list:
        out = list(values)
        for rnd in self.rounds:
            for i, j in rnd:
                if out[i] > out[j]:
                    out[i], out[j] = out[j], out[i]
        return out


def sorting_network(m: int) -> SortingNetwork:
    """Odd-even transposition network: ``m`` rounds, starting with pairs ``(0, 1), (2, 3), ...``.

    With two elements the odd round would be empty, so both rounds use ``(0, 1)``.
    """
    if m < 1:
        raise ValueError("sorting network needs m >= 1")
    rounds = []
    for r in range(m):
        pairs = tuple((i, i + 1) for i in range(r % 2, m - 1, 2))
        if not pairs:
            pairs = tuple((i, i + 1) for i in range(0, m - 1, 2))
        rounds.append(pairs)
    return SortingNetwork(m, tuple(rounds))


def _zero(a: BitMatrix, rows: Sequence[int], cols: Sequence[int]) -> bool:
    mask = sum(1 << c for c in cols)
    return not any(a.rows[r] & mask for r in rows)


def check_invariant(which: int, op: LabeledOperator) -> bool:
    """Evaluate one of the four sweep invariants on a labeled operator.

    1 and 3: every block's label columns vanish below the block and are
    invertible on it.  2 and 4: additionally each block holds one whole label
    group, and blocks above carrying a smaller group vanish on its columns.
    1 and 2 are the single-qubit cases and need ``op.p == 1``.

    Raises:
        ValueError: for an unknown invariant or a wrong block size.
    """
    if which not in (1, 2, 3, 4):
        raise ValueError(f"unknown invariant {which}")
    if which in (1, 2) and op.p != 1:
        raise ValueError(f"invariant {which} is stated for single rows (p = 1)")
    a, p, m = op.a, op.p, op.m
    sets = [op.block_labels(i) for i in range(m)]
    if which in (2, 4):
        groups = []
        for labs in sets:
            g = labs[0] // p
            if labs != list(range(g * p, (g + 1) * p)):
                return False
            groups.append(g)
    for i in range(m):
        cols = sets[i]
        rows_i = op.block_rows(i)
        if not is_invertible(a.submatrix(rows_i, cols)):
            return False
        below = [r for j in range(i + 1, m) for r in op.block_rows(j)]
        if not _zero(a, below, cols):
            return False
        if which in (2, 4):
            above = [r for j in range(i) if groups[j] < groups[i] for r in op.block_rows(j)]
            if not _zero(a, above, cols):
                return False
    return True


def is_block_northwest(a: BitMatrix, p: int) -> bool:
    """Zero blocks ``(i, j)`` whenever ``i + j > m - 1`` at granularity ``p``."""
    n = a.n_rows
    if n % p:
        raise ValueError(f"block size {p} does not divide {n}")
    m = n // p
    for r, row in enumerate(a.rows):
        i = r // p
        if row >> ((m - i) * p):
            return False
    return True


def is_block_diagonal(a: BitMatrix, p: int) -> bool:
    for r, row in enumerate(a.rows):
        i = r // p
        if row & ~(((1 << p) - 1) << (i * p)):
            return False
    return True


def _map_layers(local: Layers, to_pos: Sequence[int]) -> Layers:
    return [tuple(CnotGate(to_pos[g.control], to_pos[g.target]) for g in layer) for layer in local]


def _flatten(layers_: Layers) -> list[CnotGate]:
    return [g for layer in layers_ for g in layer]


def _pair_positions(layout: BlockLineLayout, i: int, position: Mapping[int, int]) -> list[int]:
    return [position[q] for q in layout.pair_maps[i]]


def sort_two_block_labels(
    op: LabeledOperator,
    i: int,
    step: int,
    layout: BlockLineLayout,
    solvers: LocalSolvers,
    position: Mapping[int, int] | None = None,
) -> Layers:
    """Exchange the label sets of blocks ``i`` and ``i + 1`` with one local solve.

    Step 1 moves the ``p`` smallest labels of the pair to block ``i`` (Problem 1
    on their columns); step 2 swaps two label groups that are out of order
    (Problem 2).  ``op`` is updated in place.

    Returns:
        The applied gate layers, in the operator's row coordinates.
    """
    if step not in (1, 2):
        raise ValueError(f"step must be 1 or 2, got {step}")
    p = op.p
    if position is None:
        position = layout.position
    pos = _pair_positions(layout, i, position)
    upper, lower = op.block_rows(i), op.block_rows(i + 1)
    if step == 1:
        labs = sorted(op.labels[r] for r in upper + lower)
        small, large = labs[:p], labs[p:]
        if op.block_labels(i) == small:
            return []
        local = solvers.p1(op.a.submatrix(pos, small))
    else:
        g_up, g_low = op.labels[upper[0]] // p, op.labels[lower[0]] // p
        if g_up < g_low:
            return []
        small = list(range(g_low * p, (g_low + 1) * p))
        large = list(range(g_up * p, (g_up + 1) * p))
        local = solvers.p2(op.a.submatrix(pos, small + large))
    mapped = _map_layers(local, pos)
    rows = list(op.a.rows)
    apply_gates(rows, _flatten(mapped))
    op.a = BitMatrix(rows, op.a.n_cols)
    for r, k in zip(upper, small):
        op.labels[r] = k
    for r, k in zip(lower, large):
        op.labels[r] = k
    return mapped


@dataclass
class SynthesisResult:
    """Synthesized circuit with the depth bound it was built against."""

    circuit: CnotCircuit
    bound: int
    step_depths: list[int] = field(default_factory=list)


class _Driver:
    """Carries the working matrix (position coordinates) and the reduction gates."""

    def __init__(self, a: BitMatrix, order: Sequence[int], debug: bool):
        if not a.is_square():
            raise ValueError("operator must be square")
        n = a.n_rows
        if len(order) != n:
            raise ValueError(f"operator has {n} qubits, layout has {len(order)}")
        if not is_invertible(a):
            raise SingularMatrixError("operator is singular")
        self.n = n
        self.order = tuple(order)
        self.position = {q: k for k, q in enumerate(self.order)}
        self.rows = [0] * n
        for i, qi in enumerate(self.order):
            src = a.rows[qi]
            row = 0
            for j, qj in enumerate(self.order):
                if (src >> qj) & 1:
                    row |= 1 << j
            self.rows[i] = row
        self.debug = debug
        self.gates: list[CnotGate] = []
        self.step_depths: list[int] = []

    @property
    def matrix(self) -> BitMatrix:
        return BitMatrix(self.rows, self.n)

    def _check_layout(self, layout: BlockLineLayout):
        if layout.n != self.n:
            raise ValueError(f"layout has {layout.n} qubits, operator has {self.n}")
        for i, blk in enumerate(layout.blocks):
            span = sorted(self.position[q] for q in blk)
            if span != list(range(i * layout.p, (i + 1) * layout.p)):
                raise ValueError(f"block {i} of {layout.descriptor} is not contiguous in the working order")

    def _emit(self, gates: list[CnotGate]):
        apply_gates(self.rows, gates)
        self.gates.extend(gates)

    def _record(self, start: int):
        c = CnotCircuit(self.n, tuple(self.gates[start:]))
        self.step_depths.append(len(layers(c)))

    def _assert(self, ok: bool, what: str):
        if self.debug and not ok:
            raise InvariantViolation(what)

    def sweep(self, step: int, op: LabeledOperator, layout: BlockLineLayout, solvers: LocalSolvers):
        start = len(self.gates)
        inv = 3 if step == 1 else 4
        self._assert(check_invariant(inv, op), f"invariant {inv} fails before step {step}")
        for k, rnd in enumerate(sorting_network(layout.m).rounds):
            for i, _ in rnd:
                mapped = sort_two_block_labels(op, i, step, layout, solvers, self.position)
                gates = _flatten(mapped)
                if step == 1:
                    self._emit(gates)
                else:
                    self.gates.extend(gates)
            if step == 2:
                self.rows = list(op.a.rows)
            if self.debug:
                self._assert(check_invariant(inv, op), f"invariant {inv} fails after round {k} of step {step}")
        if step == 1:
            self._assert(_blocks_sorted(op), "step 1 left labels unsorted")
            self._assert(is_block_northwest(self.matrix, layout.p), "step 1 did not reach block north-west form")
        else:
            self._assert(is_block_diagonal(self.matrix, layout.p), "step 2 did not reach block diagonal form")
        self._record(start)

    def step1(self, layout: BlockLineLayout, solvers: LocalSolvers):
        self._check_layout(layout)
        upl = upl_decompose(self.matrix)
        op = LabeledOperator(upl.v, list(upl.labels), layout.p)
        self.sweep(1, op, layout, solvers)

    def step2(self, layout: BlockLineLayout, solvers: LocalSolvers):
        self._check_layout(layout)
        self._assert(is_block_northwest(self.matrix, layout.p), "step 2 needs block north-west form")
        op = LabeledOperator(self.matrix, [self.n - 1 - r for r in range(self.n)], layout.p)
        self.sweep(2, op, layout, solvers)

    def step3(self, layout: BlockLineLayout, solvers: LocalSolvers):
        self._check_layout(layout)
        start = len(self.gates)
        for bmap in layout.block_maps:
            pos = [self.position[q] for q in bmap]
            local = solvers.p3(self.matrix.submatrix(pos, pos))
            self._emit(_flatten(_map_layers(local, pos)))
        self._assert(self.rows == [1 << i for i in range(self.n)], "step 3 did not reach the identity")
        self._record(start)

    def re_block(self, layout: BlockLineLayout, solvers: LocalSolvers, p_new: int):
        self._check_layout(layout)
        start = len(self.gates)
        self.gates.extend(re_block_gates(self.matrix, layout, solvers, p_new, self.position))
        apply_gates(self.rows, self.gates[start:])
        self._assert(is_block_northwest(self.matrix, p_new), "re-blocking failed")
        self._record(start)

    def circuit(self) -> CnotCircuit:
        """Reverse the reduction and map positions back to qubits."""
        return CnotCircuit(
            self.n, tuple(CnotGate(self.order[g.control], self.order[g.target]) for g in reversed(self.gates))
        )


def _blocks_sorted(op: LabeledOperator) -> bool:
    return all(op.block_labels(i) == list(range(i * op.p, (i + 1) * op.p)) for i in range(op.m))


def _exchange_blocks(r: int, q: int) -> list[int]:
    """Rows of the ``r q x r q`` block anti-identity with ``q x q`` identity blocks."""
    rows = []
    for a in range(r):
        b = r - 1 - a
        rows += [1 << (b * q + t) for t in range(q)]
    return rows


def re_block_gates(
    a: BitMatrix,
    layout: BlockLineLayout,
    solvers: LocalSolvers,
    p_new: int,
    position: Mapping[int, int] | None = None,
) -> list[CnotGate]:
    """Gates turning block north-west form at ``layout.p`` into block north-west form at ``p_new``.

    Each anti-diagonal block ``D`` is mapped to the block exchange matrix ``K``
    by one local Problem-3 solve on ``D K``; blocks already in the finer shape
    are left alone.  The solves act on disjoint blocks, so the added depth is at
    most ``solvers.dstar``.

    Raises:
        ValueError: if ``p_new`` does not divide ``layout.p`` or ``a`` is not block north-west.
    """
    p = layout.p
    if p_new < 1 or p % p_new:
        raise ValueError(f"{p_new} does not divide block size {p}")
    if not is_block_northwest(a, p):
        raise ValueError("re-blocking needs a block north-west matrix")
    if position is None:
        position = layout.position
    r = p // p_new
    k_rows = _exchange_blocks(r, p_new)
    m = layout.m
    gates: list[CnotGate] = []
    for i, bmap in enumerate(layout.block_maps):
        pos = [position[q] for q in bmap]
        rows = list(range(i * p, (i + 1) * p))
        cols = list(range((m - 1 - i) * p, (m - i) * p))
        d = a.submatrix(rows, cols)
        if is_block_northwest(d, p_new):
            continue
        # local order: row t of the block sits at position pos[t]
        perm = [pos_t - i * p for pos_t in pos]
        dk = d @ BitMatrix(k_rows, p)
        local = dk.submatrix(perm, perm)
        gates += _flatten(_map_layers(solvers.p3(local), pos))
    return gates


def re_block(op: LabeledOperator, p_new: int, layout: BlockLineLayout, solvers: LocalSolvers | None = None) -> Layers:
    """Refine the block north-west form of ``op.a`` to granularity ``p_new`` in place.

    ``op.a`` is in the layout's position coordinates.  Labels are reset to the
    reversed order expected by the second sweep at the new granularity.
    """
    if solvers is None:
        solvers = solvers_for(layout)
    gates = re_block_gates(op.a, layout, solvers, p_new)
    rows = list(op.a.rows)
    apply_gates(rows, gates)
    op.a = BitMatrix(rows, op.a.n_cols)
    op.p = p_new
    op.labels = [op.a.n_rows - 1 - r for r in range(op.a.n_rows)]
    return layers(CnotCircuit(op.a.n_rows, tuple(gates)))


def synthesize(
    a: BitMatrix,
    layout: BlockLineLayout,
    solvers: LocalSolvers | None = None,
    strategy: str = "auto",
    debug: bool = False,
) -> SynthesisResult:
    """Run the three-step block synthesis and report the depth bound used.

    Args:
        a: Invertible operator on ``layout.n`` qubits.
        layout: Block partition of the architecture.
        solvers: Local solvers; chosen by :func:`solvers_for` when omitted.
        strategy: Passed to :func:`solvers_for` when ``solvers`` is omitted.
        debug: Check the sweep invariants after every round.

    Raises:
        SingularMatrixError: if ``a`` is singular.
        ValueError: if sizes or solvers do not match the layout.
    """
    if solvers is None:
        solvers = solvers_for(layout, strategy)
    if solvers.p != layout.p:
        raise ValueError(f"solvers are for p={solvers.p}, layout has p={layout.p}")
    drv = _Driver(a, layout.order, debug)
    drv.step1(layout, solvers)
    drv.step2(layout, solvers)
    drv.step3(layout, solvers)
    return SynthesisResult(drv.circuit(), solvers.bound(layout.m), drv.step_depths)


def synth(
    a: BitMatrix,
    layout: BlockLineLayout,
    solvers: LocalSolvers | None = None,
    strategy: str = "auto",
    debug: bool = False,
) -> CnotCircuit:
    """Circuit implementing ``a`` that only uses CNOTs along ``layout.graph`` edges."""
    return synthesize(a, layout, solvers, strategy, debug).circuit


def synth_lnn(a: BitMatrix, debug: bool = False) -> CnotCircuit:
    """Synthesis on a path of ``n`` qubits; depth at most ``5 n``."""
    return synth(a, line(a.n_rows), ClosedFormLine(), debug=debug)


def layered_gates(c: CnotCircuit) -> Layers:
    """ASAP layers of a circuit as tuples."""
    return [tuple(layer) for layer in layers(c)]


def combined_bound(
    layout1: BlockLineLayout, solvers1: LocalSolvers, layout2: BlockLineLayout, solvers2: LocalSolvers
) -> int:
    return layout1.m * solvers1.d1 + solvers1.dstar + layout2.m * solvers2.d2 + solvers2.dstar


def synthesize_combined(
    a: BitMatrix,
    layout1: BlockLineLayout,
    layout2: BlockLineLayout,
    solvers1: LocalSolvers | None = None,
    solvers2: LocalSolvers | None = None,
    debug: bool = False,
) -> SynthesisResult:
    """Step 1 with the coarse blocks of ``layout1``, steps 2-3 with the finer blocks of ``layout2``.

    Every block of ``layout1`` must be the union of consecutive blocks of
    ``layout2`` and both layouts must share the physical qubits.

    Raises:
        ValueError: for incompatible layouts.
    """
    if layout1.n != layout2.n:
        raise ValueError("layouts cover different qubit counts")
    if layout1.p % layout2.p:
        raise ValueError(f"fine block size {layout2.p} does not divide {layout1.p}")
    if layout1.graph.edges != layout2.graph.edges:
        log.info("combined layouts use different edge sets; compliance is checked against their union")
    if solvers1 is None:
        solvers1 = solvers_for(layout1)
    if solvers2 is None:
        solvers2 = solvers_for(layout2)
    drv = _Driver(a, layout2.order, debug)
    drv._check_layout(layout1)
    drv.step1(layout1, solvers1)
    drv.re_block(layout1, solvers1, layout2.p)
    drv.step2(layout2, solvers2)
    drv.step3(layout2, solvers2)
    return SynthesisResult(drv.circuit(), combined_bound(layout1, solvers1, layout2, solvers2), drv.step_depths)


def synth_combined(
    a: BitMatrix,
    layout1: BlockLineLayout,
    layout2: BlockLineLayout,
    solvers1: LocalSolvers | None = None,
    solvers2: LocalSolvers | None = None,
    debug: bool = False,
) -> CnotCircuit:
    """Combined-layout synthesis; see :func:`synthesize_combined`."""
    return synthesize_combined(a, layout1, layout2, solvers1, solvers2, debug).circuit
