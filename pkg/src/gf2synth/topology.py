"""Connectivity graphs, block-line layouts and depth-1 move sets.

Qubit numbering used by the architecture builders:

* ``line:n`` -- qubits ``0..n-1`` along the path.
* ``ladder:WxL`` / ``ladder-diag:WxL`` -- ``W`` rails of length ``L``; qubit
  ``(rail r, rung c)`` is ``r * L + c``.  Blocks are rungs.
* ``grid:RxC`` / ``grid-diag:RxC`` / ``altered-grid:RxC`` -- row-major,
  qubit ``(r, c)`` is ``r * C + c``.  Blocks are 2x2 tiles visited in
  serpentine order (left to right on even bands, right to left on odd bands).
* ``blocks-full:p=P,m=M`` -- block ``i`` holds qubits ``i*P .. i*P+P-1``.

For ``grid-diag`` both diagonals are added to every unit square whose top row
is even (inside tiles and across horizontal tile junctions) and to the square
joining the two tiles of each serpentine turn, so every adjacent tile pair
sees the same local graph.
"""

from __future__ import annotations

import hashlib
import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx
from networkx.algorithms import isomorphism

from .cnot_circuit import CnotCircuit, CnotGate, simulate
from .gf2_core import BitMatrix


@dataclass(frozen=True)
class ConnectivityGraph:
    n: int
    edges: frozenset[tuple[int, int]]

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        norm = set()
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) out of range for {n} vertices")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", frozenset(norm))

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def induced(self, vertices: Sequence[int]) -> ConnectivityGraph:
        """Subgraph on ``vertices``, relabelled to ``0..len(vertices)-1`` in the given order."""
        index = {v: k for k, v in enumerate(vertices)}
        sub = [(index[a], index[b]) for a, b in self.edges if a in index and b in index]
        return ConnectivityGraph(len(vertices), sub)

    def is_connected(self) -> bool:
        return self.n <= 1 or nx.is_connected(self.to_networkx())

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def fingerprint(self) -> str:
        rows = []
        for i in range(self.n):
            rows.append("".join("1" if self.has_edge(i, j) else "0" for j in range(self.n)))
        return hashlib.sha1("/".join(rows).encode()).hexdigest()[:16]

    @classmethod
    def complete(cls, n: int) -> ConnectivityGraph:
        return cls(n, itertools.combinations(range(n), 2))

    @classmethod
    def path(cls, n: int) -> ConnectivityGraph:
        return cls(n, ((i, i + 1) for i in range(n - 1)))


@dataclass(frozen=True)
class Move:
    """A depth-1 layer of CNOTs on pairwise disjoint qubits (local indices)."""

    gates: tuple[CnotGate, ...]

    def __post_init__(self):
        if not self.gates:
            raise ValueError("a move needs at least one gate")
        gates = tuple(sorted(self.gates, key=lambda g: (g.control, g.target)))
        seen: set[int] = set()
        for g in gates:
            if g.control in seen or g.target in seen:
                raise ValueError("gates of a move must act on disjoint qubits")
            seen.update((g.control, g.target))
        object.__setattr__(self, "gates", gates)

    @property
    def support(self) -> int:
        mask = 0
        for g in self.gates:
            mask |= (1 << g.control) | (1 << g.target)
        return mask

    def apply_to_vector(self, v: int) -> int:
        """Image of a column vector (bit r = row r) under the row operations."""
        for g in self.gates:
            if (v >> g.control) & 1:
                v ^= 1 << g.target
        return v

    def matrix(self, n: int) -> BitMatrix:
        return simulate(CnotCircuit(n, self.gates))


def oriented_matchings(g: ConnectivityGraph) -> list[Move]:
    """Every nonempty matching of ``g`` with every control/target orientation.

    Order: by matching size, then lexicographically by edge list, then by
    orientation bits (bit ``k`` set means edge ``k`` points from its larger
    endpoint to its smaller one).
    """
    edges = g.sorted_edges()
    matchings: list[tuple[tuple[int, int], ...]] = []

    def extend(start: int, used: int, current: list[tuple[int, int]]):
        if current:
            matchings.append(tuple(current))
        for k in range(start, len(edges)):
            a, b = edges[k]
            if used & ((1 << a) | (1 << b)):
                continue
            current.append(edges[k])
            extend(k + 1, used | (1 << a) | (1 << b), current)
            current.pop()

    extend(0, 0, [])
    matchings.sort(key=lambda m: (len(m), m))
    moves = []
    for m in matchings:
        for bits in range(1 << len(m)):
            gates = []
            for k, (a, b) in enumerate(m):
                gates.append(CnotGate(b, a) if (bits >> k) & 1 else CnotGate(a, b))
            moves.append(Move(tuple(gates)))
    return moves


@dataclass(frozen=True)
class BlockLineLayout:
    """Qubits split into ``m`` blocks of ``p`` arranged on a line.

    ``pair_maps[i][k]`` is the global qubit playing local vertex ``k`` for the
    block pair ``(i, i+1)``: local ``0..p-1`` are in block ``i``, local
    ``p..2p-1`` in block ``i+1``.  Each map sends every edge of
    ``local_graph`` to an edge of ``graph``.  ``block_maps`` does the same for
    single blocks and ``intra_graph``.
    """

    descriptor: str
    p: int
    m: int
    blocks: tuple[tuple[int, ...], ...]
    graph: ConnectivityGraph
    local_graph: ConnectivityGraph
    intra_graph: ConnectivityGraph
    pair_maps: tuple[tuple[int, ...], ...]
    block_maps: tuple[tuple[int, ...], ...]
    induced_exact: bool = field(default=True)

    @property
    def n(self) -> int:
        return self.p * self.m

    @cached_property
    def order(self) -> tuple[int, ...]:
        """Global qubit sitting at each block-major position."""
        return tuple(q for b in self.blocks for q in b)

    @cached_property
    def position(self) -> dict[int, int]:
        return {q: k for k, q in enumerate(self.order)}


def pair_embedding(layout: BlockLineLayout, i: int) -> tuple[tuple[int, ...], ConnectivityGraph]:
    """Local-to-global map of block pair ``(i, i+1)`` and the shared local graph."""
    if not 0 <= i < layout.m - 1:
        raise IndexError(f"pair index {i} out of range for {layout.m} blocks")
    return layout.pair_maps[i], layout.local_graph


def _side_matcher(big: nx.Graph, small: nx.Graph) -> isomorphism.GraphMatcher:
    return isomorphism.GraphMatcher(
        big, small, node_match=lambda x, y: x.get("side") == y.get("side")
    )


def _embed(graph: ConnectivityGraph, groups: Sequence[Sequence[int]], local: ConnectivityGraph):
    """Map local vertices onto the qubits of ``groups`` (side-respecting).

    Returns ``(local_to_global, exact)``; ``exact`` is False when only a
    monomorphism exists (the qubits carry extra edges the local graph lacks).
    """
    qubits = [q for grp in groups for q in grp]
    big = graph.induced(qubits).to_networkx()
    p = len(groups[0])
    for v in big.nodes:
        big.nodes[v]["side"] = v // p
    small = local.to_networkx()
    for v in small.nodes:
        small.nodes[v]["side"] = v // p
    gm = _side_matcher(big, small)
    if gm.is_isomorphic():
        mapping, exact = gm.mapping, True
    else:
        mapping = next(gm.subgraph_monomorphisms_iter(), None)
        if mapping is None:
            raise ValueError(f"qubits {qubits} do not embed the local graph")
        exact = False
    inv = {small_v: big_v for big_v, small_v in mapping.items()}
    return tuple(qubits[inv[k]] for k in range(len(qubits))), exact


def make_layout(
    descriptor: str,
    graph: ConnectivityGraph,
    blocks: Sequence[Sequence[int]],
    local_graph: ConnectivityGraph | None = None,
    intra_graph: ConnectivityGraph | None = None,
) -> BlockLineLayout:
    """Validate a block partition and compute all pair/block embeddings."""
    blocks = tuple(tuple(b) for b in blocks)
    m = len(blocks)
    p = len(blocks[0])
    if any(len(b) != p for b in blocks):
        raise ValueError("blocks must have equal size")
    flat = sorted(q for b in blocks for q in b)
    if flat != list(range(graph.n)):
        raise ValueError("blocks must partition the qubits")
    for b in blocks:
        if not graph.induced(b).is_connected():
            raise ValueError(f"block {b} does not induce a connected subgraph")
    if intra_graph is None:
        intra_graph = graph.induced(blocks[0])
    block_maps = []
    exact = True
    for b in blocks:
        bm, ex = _embed(graph, [b], intra_graph)
        block_maps.append(bm)
        exact &= ex
    pair_maps = []
    if m >= 2:
        if local_graph is None:
            # the sparsest pair embeds into every other pair when layouts
            # carry extra edges at some junctions
            candidates = [graph.induced(blocks[i] + blocks[i + 1]) for i in range(m - 1)]
            local_graph = min(candidates, key=lambda g: len(g.edges))
        for i in range(m - 1):
            if not any(graph.has_edge(a, b) for a in blocks[i] for b in blocks[i + 1]):
                raise ValueError(f"blocks {i} and {i + 1} share no edge")
            pm, ex = _embed(graph, [blocks[i], blocks[i + 1]], local_graph)
            pair_maps.append(pm)
            exact &= ex
    elif local_graph is None:
        local_graph = ConnectivityGraph.complete(2 * p)
    return BlockLineLayout(
        descriptor=descriptor,
        p=p,
        m=m,
        blocks=blocks,
        graph=graph,
        local_graph=local_graph,
        intra_graph=intra_graph,
        pair_maps=tuple(pair_maps),
        block_maps=tuple(block_maps),
        induced_exact=exact,
    )


# -- architecture builders --------------------------------------------------


def line(n: int) -> BlockLineLayout:
    if n < 1:
        raise ValueError("line needs at least one qubit")
    return make_layout(f"line:{n}", ConnectivityGraph.path(n), [[i] for i in range(n)])


def _ladder_graph(w: int, length: int, diagonals: bool) -> ConnectivityGraph:
    q = lambda r, c: r * length + c  # noqa: E731
    edges = []
    for r in range(w):
        for c in range(length):
            if c + 1 < length:
                edges.append((q(r, c), q(r, c + 1)))
            if r + 1 < w:
                edges.append((q(r, c), q(r + 1, c)))
            if diagonals and r + 1 < w and c + 1 < length:
                edges.append((q(r, c), q(r + 1, c + 1)))
                edges.append((q(r + 1, c), q(r, c + 1)))
    return ConnectivityGraph(w * length, edges)


def ladder(w: int, length: int, diagonals: bool = False) -> BlockLineLayout:
    if w < 1 or length < 1:
        raise ValueError("ladder dimensions must be positive")
    graph = _ladder_graph(w, length, diagonals)
    blocks = [[r * length + c for r in range(w)] for c in range(length)]
    kind = "ladder-diag" if diagonals else "ladder"
    return make_layout(f"{kind}:{w}x{length}", graph, blocks)


def _grid_edges(rows: int, cols: int) -> list[tuple[int, int]]:
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((r * cols + c, r * cols + c + 1))
            if r + 1 < rows:
                edges.append((r * cols + c, (r + 1) * cols + c))
    return edges


def _square_diagonals(r: int, c: int, cols: int) -> list[tuple[int, int]]:
    return [(r * cols + c, (r + 1) * cols + c + 1), ((r + 1) * cols + c, r * cols + c + 1)]


def _turn_column(band: int, cols: int) -> int:
    """Left column of the tile where the serpentine leaves ``band``."""
    return cols - 2 if band % 2 == 0 else 0


def _tile_blocks(rows: int, cols: int) -> list[list[int]]:
    blocks = []
    for band in range(rows // 2):
        starts = range(0, cols, 2) if band % 2 == 0 else range(cols - 2, -1, -2)
        r = 2 * band
        for c in starts:
            blocks.append([r * cols + c, r * cols + c + 1, (r + 1) * cols + c, (r + 1) * cols + c + 1])
    return blocks


def _domino_blocks(rows: int, cols: int) -> list[list[int]]:
    blocks = []
    for band in range(rows // 2):
        order = range(cols) if band % 2 == 0 else range(cols - 1, -1, -1)
        r = 2 * band
        for c in order:
            blocks.append([r * cols + c, (r + 1) * cols + c])
    return blocks


def _check_even(rows: int, cols: int, what: str):
    if rows < 2 or cols < 2 or rows % 2 or cols % 2:
        raise ValueError(f"{what} needs even dimensions >= 2, got {rows}x{cols}")


def grid(rows: int, cols: int, diagonals: bool = False) -> BlockLineLayout:
    _check_even(rows, cols, "grid")
    edges = _grid_edges(rows, cols)
    if diagonals:
        for r in range(0, rows, 2):
            for c in range(cols - 1):
                edges += _square_diagonals(r, c, cols)
        for band in range(rows // 2 - 1):
            edges += _square_diagonals(2 * band + 1, _turn_column(band, cols), cols)
    graph = ConnectivityGraph(rows * cols, edges)
    kind = "grid-diag" if diagonals else "grid"
    return make_layout(f"{kind}:{rows}x{cols}", graph, _tile_blocks(rows, cols))


def altered_grid_graph(rows: int, cols: int) -> ConnectivityGraph:
    """Grid plus two edges per band change, alternating right and left ends."""
    _check_even(rows, cols, "altered grid")
    edges = _grid_edges(rows, cols)
    for band in range(rows // 2 - 1):
        c = cols - 1 if band % 2 == 0 else 0
        r = 2 * band
        edges.append((r * cols + c, (r + 2) * cols + c))
        edges.append(((r + 1) * cols + c, (r + 3) * cols + c))
    return ConnectivityGraph(rows * cols, edges)


def domino_ladder(graph: ConnectivityGraph, rows: int, cols: int, descriptor: str) -> BlockLineLayout:
    """Width-2 ladder layout of vertical dominoes snaking through the bands."""
    return make_layout(
        descriptor, graph, _domino_blocks(rows, cols), local_graph=ConnectivityGraph(4, [(0, 1), (2, 3), (0, 2), (1, 3)])
    )


def altered_grid(rows: int, cols: int) -> BlockLineLayout:
    graph = altered_grid_graph(rows, cols)
    return domino_ladder(graph, rows, cols, f"altered-grid:{rows}x{cols}")


def blocks_full(p: int, m: int) -> BlockLineLayout:
    if p < 1 or m < 1:
        raise ValueError("blocks-full needs p >= 1 and m >= 1")
    edges = set()
    for i in range(m):
        lo = i * p
        hi = min((i + 2) * p, p * m)
        edges.update(itertools.combinations(range(lo, hi), 2))
    graph = ConnectivityGraph(p * m, edges)
    return make_layout(f"blocks-full:p={p},m={m}", graph, [list(range(i * p, (i + 1) * p)) for i in range(m)])


def combined_layouts(descriptor: str) -> tuple[BlockLineLayout, BlockLineLayout]:
    """Tile layout (step 1) and domino ladder layout (step 2) on one physical graph.

    Accepts ``altered-grid:RxC`` and ``grid:2xC``.
    """
    kind, rows, cols = _parse_dims(descriptor)
    if kind == "altered-grid":
        graph = altered_grid_graph(rows, cols)
    elif kind == "grid" and rows == 2:
        _check_even(rows, cols, "grid")
        graph = ConnectivityGraph(rows * cols, _grid_edges(rows, cols))
    else:
        raise ValueError(f"no combined layout for {descriptor!r}")
    tiles = make_layout(f"{kind}:{rows}x{cols}#tiles", graph, _tile_blocks(rows, cols))
    dominoes = domino_ladder(graph, rows, cols, f"{kind}:{rows}x{cols}#dominoes")
    return tiles, dominoes


_DIMS = re.compile(r"^(ladder|ladder-diag|grid|grid-diag|altered-grid):(\d+)x(\d+)$")


def _parse_dims(descriptor: str) -> tuple[str, int, int]:
    mt = _DIMS.match(descriptor.strip())
    if not mt:
        raise ValueError(f"unknown architecture descriptor {descriptor!r}")
    return mt.group(1), int(mt.group(2)), int(mt.group(3))


def build_layout(descriptor: str) -> BlockLineLayout:
    """Parse an architecture descriptor and build its layout.

    ``line:<n>``, ``ladder:<w>x<len>``, ``ladder-diag:<w>x<len>``,
    ``grid:<r>x<c>``, ``grid-diag:<r>x<c>``, ``blocks-full:p=<p>,m=<m>``,
    ``altered-grid:<2L>x<2K>`` (the domino ladder layout; see
    :func:`combined_layouts` for the tile layout used in step 1).
    """
    text = descriptor.strip()
    mt = re.match(r"^line:(\d+)$", text)
    if mt:
        return line(int(mt.group(1)))
    mt = re.match(r"^blocks-full:p=(\d+),m=(\d+)$", text)
    if mt:
        return blocks_full(int(mt.group(1)), int(mt.group(2)))
    kind, a, b = _parse_dims(text)
    if kind in ("ladder", "ladder-diag"):
        return ladder(a, b, diagonals=kind == "ladder-diag")
    if kind in ("grid", "grid-diag"):
        return grid(a, b, diagonals=kind == "grid-diag")
    return altered_grid(a, b)


def local_graph_for(name: str) -> tuple[int, ConnectivityGraph, ConnectivityGraph]:
    """Named local topologies: ``(p, pair graph, intra-block graph)``.

    Names: ``line``, ``ladder2``, ``ladder2-diag``, ``ladder3``,
    ``ladder3-diag``, ``ladder4``, ``ladder4-diag``, ``grid``, ``grid-diag``,
    ``full2``, ``full3``, ``full4`` (fully connected pair of blocks).
    """
    presets = {
        "line": "line:2",
        "ladder2": "ladder:2x2",
        "ladder2-diag": "ladder-diag:2x2",
        "ladder3": "ladder:3x2",
        "ladder3-diag": "ladder-diag:3x2",
        "ladder4": "ladder:4x2",
        "ladder4-diag": "ladder-diag:4x2",
        "grid": "grid:2x4",
        "grid-diag": "grid-diag:2x4",
        "full2": "blocks-full:p=2,m=2",
        "full3": "blocks-full:p=3,m=2",
        "full4": "blocks-full:p=4,m=2",
    }
    if name not in presets:
        raise ValueError(f"unknown local topology {name!r}")
    lay = build_layout(presets[name])
    return lay.p, lay.local_graph, lay.intra_graph
