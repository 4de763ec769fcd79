from __future__ import annotations

import itertools

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gf2synth.cnot_circuit import CnotCircuit, check_compliance, simulate
from gf2synth.gf2_core import BitMatrix
from gf2synth.topology import (
    ConnectivityGraph,
    Move,
    build_layout,
    combined_layouts,
    local_graph_for,
    oriented_matchings,
    pair_embedding,
)

DESCRIPTORS = [
    "line:5",
    "line:8",
    "ladder:2x6",
    "ladder:3x4",
    "ladder:4x3",
    "ladder-diag:2x5",
    "ladder-diag:3x3",
    "grid:4x6",
    "grid:4x4",
    "grid:2x8",
    "grid:6x4",
    "grid-diag:4x6",
    "blocks-full:p=3,m=4",
    "blocks-full:p=5,m=3",
    "altered-grid:4x6",
]


def _brute_force_matchings(g: ConnectivityGraph) -> int:
    """Oriented matchings counted from all edge subsets."""
    total = 0
    edges = g.sorted_edges()
    for r in range(1, len(edges) + 1):
        for subset in itertools.combinations(edges, r):
            verts = [v for e in subset for v in e]
            if len(verts) == len(set(verts)):
                total += 2**r
    return total


def test_graph_validation():
    with pytest.raises(ValueError):
        ConnectivityGraph(3, [(1, 1)])
    with pytest.raises(ValueError):
        ConnectivityGraph(3, [(0, 3)])
    g = ConnectivityGraph(3, [(2, 0)])
    assert g.has_edge(0, 2) and g.has_edge(2, 0)


def test_line_layout():
    lay = build_layout("line:5")
    assert (lay.p, lay.m) == (1, 5)
    assert lay.graph == ConnectivityGraph.path(5)


def test_ladder_local_graph_is_four_cycle():
    lay = build_layout("ladder:2x6")
    assert (lay.p, lay.m) == (2, 6)
    assert nx.is_isomorphic(lay.local_graph.to_networkx(), nx.cycle_graph(4))


def test_grid_layout_tiles_and_pair_graph():
    lay = build_layout("grid:4x6")
    assert (lay.p, lay.m) == (4, 6)
    assert lay.local_graph.n == 8 and len(lay.local_graph.edges) == 10
    assert nx.is_isomorphic(lay.local_graph.to_networkx(), nx.grid_2d_graph(2, 4))
    # serpentine: first band left to right, second band right to left
    tile_rc = [divmod(min(b), 6) for b in lay.blocks]
    assert [c for r, c in tile_rc[:3]] == [0, 2, 4]
    assert [c for r, c in tile_rc[3:]] == [4, 2, 0]
    assert all(r == 0 for r, _ in tile_rc[:3]) and all(r == 2 for r, _ in tile_rc[3:])


@pytest.mark.parametrize("desc", DESCRIPTORS)
def test_layout_invariants(desc):
    lay = build_layout(desc)
    flat = sorted(q for b in lay.blocks for q in b)
    assert flat == list(range(lay.n))
    assert all(len(b) == lay.p for b in lay.blocks)
    for b in lay.blocks:
        assert lay.graph.induced(list(b)).is_connected()
    for i in range(lay.m - 1):
        pmap, local = pair_embedding(lay, i)
        assert set(pmap[: lay.p]) == set(lay.blocks[i])
        assert set(pmap[lay.p :]) == set(lay.blocks[i + 1])
        for a, b in local.edges:
            assert lay.graph.has_edge(pmap[a], pmap[b])
        if lay.induced_exact:
            assert lay.graph.induced(list(pmap)) == local
    for bmap, b in zip(lay.block_maps, lay.blocks):
        assert set(bmap) == set(b)
        for a, c in lay.intra_graph.edges:
            assert lay.graph.has_edge(bmap[a], bmap[c])


def test_pair_embedding_examples():
    assert pair_embedding(build_layout("line:4"), 0)[0] == (0, 1)
    lay = build_layout("ladder:2x4")
    pmap, local = pair_embedding(lay, 1)
    assert set(pmap) == set(lay.blocks[1]) | set(lay.blocks[2])
    with pytest.raises(IndexError):
        pair_embedding(lay, 3)


def test_grid_turn_pair_is_vertical_stack():
    lay = build_layout("grid:4x4")
    # blocks 1 and 2 are stacked at the serpentine turn
    pmap, local = pair_embedding(lay, 1)
    cols = {q % 4 for q in pmap}
    assert cols == {2, 3}
    assert lay.graph.induced(list(pmap)) == local


@pytest.mark.parametrize("bad", ["line:0", "grid:3x4", "ladder:2x", "torus:4x4", "blocks-full:p=0,m=2", "grid:4x5"])
def test_bad_descriptors(bad):
    with pytest.raises(ValueError):
        build_layout(bad)


def test_matching_examples():
    assert len(oriented_matchings(ConnectivityGraph.complete(2))) == 2
    assert len(oriented_matchings(ConnectivityGraph.path(3))) == 4
    assert len(oriented_matchings(ConnectivityGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)]))) == 16


@pytest.mark.parametrize("name", ["line", "ladder2", "ladder2-diag", "ladder3", "grid", "full3", "grid-diag"])
def test_matching_counts_match_brute_force(name):
    _, g, _ = local_graph_for(name)
    moves = oriented_matchings(g)
    assert len(moves) == _brute_force_matchings(g)
    assert len(set(moves)) == len(moves)
    assert oriented_matchings(g) == moves  # deterministic


@given(st.sampled_from(["ladder2", "ladder2-diag", "ladder3", "grid"]), st.data())
def test_moves_are_involutions(name, data):
    _, g, _ = local_graph_for(name)
    mv = data.draw(st.sampled_from(oriented_matchings(g)))
    m = mv.matrix(g.n)
    assert m @ m == BitMatrix.identity(g.n)
    assert check_compliance(CnotCircuit(g.n, mv.gates), g) == []


def test_move_rejects_overlap():
    from gf2synth.cnot_circuit import CnotGate

    with pytest.raises(ValueError):
        Move((CnotGate(0, 1), CnotGate(1, 2)))
    with pytest.raises(ValueError):
        Move(())


@pytest.mark.parametrize("desc", ["grid:4x6", "ladder:3x5", "grid-diag:4x4"])
def test_move_counts_equal_for_all_pairs(desc):
    lay = build_layout(desc)
    counts = {len(oriented_matchings(lay.graph.induced(list(pmap)))) for pmap in lay.pair_maps}
    assert counts == {len(oriented_matchings(lay.local_graph))}


def test_blocks_full_graph():
    lay = build_layout("blocks-full:p=3,m=3")
    assert len(lay.graph.edges) == 2 * 15 - 3
    assert len(lay.local_graph.edges) == 15


def test_combined_layouts_share_qubits():
    tiles, dominoes = combined_layouts("altered-grid:4x8")
    assert (tiles.p, dominoes.p) == (4, 2)
    assert tiles.n == dominoes.n == 32
    for tile in tiles.blocks:
        halves = [b for b in dominoes.blocks if set(b) <= set(tile)]
        assert len(halves) == 2


def test_move_matrix_matches_simulation():
    _, g, _ = local_graph_for("grid")
    for mv in oriented_matchings(g)[:50]:
        assert mv.matrix(8) == simulate(CnotCircuit(8, mv.gates))
        for v in range(1, 256, 37):
            col = BitMatrix.from_columns([v], 8)
            assert BitMatrix.from_columns([mv.apply_to_vector(v)], 8) == mv.matrix(8) @ col
