from __future__ import annotations

import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gf2synth.block_synth import (
    InvariantViolation,
    LabeledOperator,
    check_invariant,
    is_block_diagonal,
    is_block_northwest,
    re_block,
    sort_two_block_labels,
    sorting_network,
    synth,
    synth_combined,
    synth_lnn,
    synthesize,
    synthesize_combined,
)
from gf2synth.box_solvers import solvers_for
from gf2synth.box_solvers.solvers import ClosedFormLine
from gf2synth.cnot_circuit import CnotCircuit, check_compliance, depth, simulate
from gf2synth.gf2_core import BitMatrix, SingularMatrixError, random_invertible, upl_decompose
from gf2synth.topology import build_layout, combined_layouts, line
from oracles import as_array, asap_depth, replay

# -- sorting network ----------------------------------------------------------------


def test_sorting_network_small_cases():
    assert sorting_network(1).rounds == ((),)
    assert sorting_network(2).rounds == (((0, 1),), ((0, 1),))
    assert sorting_network(3).rounds == (((0, 1),), ((1, 2),), ((0, 1),))
    with pytest.raises(ValueError):
        sorting_network(0)


@pytest.mark.parametrize("m", range(1, 8))
def test_sorting_network_sorts_every_permutation(m):
    net = sorting_network(m)
    assert len(net.rounds) == m
    for rnd in net.rounds:
        used = [v for pair in rnd for v in pair]
        assert len(used) == len(set(used))
        assert all(j == i + 1 for i, j in rnd)
    for perm in itertools.permutations(range(m)):
        assert net.sort(perm) == list(range(m))


def test_sorting_network_larger_sampled():
    rng = random.Random(0)
    for m in (8, 11, 16):
        net = sorting_network(m)
        for _ in range(300):
            vals = rng.sample(range(m), m)
            assert net.sort(vals) == sorted(vals)


# -- invariants ---------------------------------------------------------------------------


def _op(rows, labels, p=1):
    return LabeledOperator(BitMatrix.from_lists(rows), list(labels), p)


def test_invariants_on_identity():
    for which in (1, 2, 3, 4):
        assert check_invariant(which, LabeledOperator(BitMatrix.identity(4), [0, 1, 2, 3], 1))
    assert check_invariant(4, LabeledOperator(BitMatrix.identity(6), list(range(6)), 2))


def test_invariant_one_figure_example():
    rows = [[1, 1, 1, 1, 0], [1, 1, 0, 1, 0], [1, 1, 0, 0, 1], [1, 0, 0, 0, 1], [1, 0, 0, 0, 0]]
    assert check_invariant(1, _op(rows, [2, 3, 1, 4, 0]))
    assert not check_invariant(1, _op(rows, [3, 2, 1, 4, 0]))


def test_invariant_two_figure_examples():
    left = [[1, 0, 1, 1, 1], [0, 0, 0, 1, 0], [0, 1, 1, 0, 0], [0, 1, 0, 0, 0], [1, 0, 0, 0, 0]]
    right = [[0, 0, 0, 1, 0], [1, 0, 1, 0, 1], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [1, 0, 0, 0, 0]]
    assert check_invariant(2, _op(left, [4, 3, 2, 1, 0]))
    assert check_invariant(2, _op(right, [3, 4, 1, 2, 0]))


def test_invariant_four_figure_example():
    rows = [
        [0, 1, 1, 1, 1, 0],
        [1, 0, 1, 1, 0, 1],
        [1, 1, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
    ]
    assert check_invariant(4, _op(rows, [4, 5, 0, 1, 2, 3], 2))
    # block 1 holding a split group breaks it
    assert not check_invariant(4, _op(rows, [4, 5, 0, 2, 1, 3], 2))


def _random_block_northwest(n: int, p: int, rng: random.Random) -> BitMatrix:
    m = n // p
    rows = []
    for i in range(m):
        anti = random_invertible(p, rng.randrange(1 << 30))
        shift = (m - 1 - i) * p
        for t in range(p):
            rows.append((anti.rows[t] << shift) | (rng.getrandbits(shift) if shift else 0))
    return BitMatrix(rows, n)


@pytest.mark.parametrize("n,p", [(5, 1), (8, 1), (6, 2), (8, 2), (12, 3), (8, 4)])
def test_northwest_with_reversed_labels_satisfies_step_two_invariant(n, p):
    rng = random.Random(n * p)
    for _ in range(20):
        a = _random_block_northwest(n, p, rng)
        assert is_block_northwest(a, p)
        op = LabeledOperator(a, [n - 1 - r for r in range(n)], p)
        assert check_invariant(4, op)
        if p == 1:
            assert check_invariant(2, op)


def test_invariant_argument_errors():
    op = LabeledOperator(BitMatrix.identity(4), [0, 1, 2, 3], 2)
    with pytest.raises(ValueError):
        check_invariant(1, op)
    with pytest.raises(ValueError):
        check_invariant(5, op)
    with pytest.raises(ValueError):
        LabeledOperator(BitMatrix.identity(4), [0, 1, 2, 3], 3)
    with pytest.raises(ValueError):
        LabeledOperator(BitMatrix.identity(3), [0, 1, 1], 1)


# -- sort_two_block_labels ----------------------------------------------------------------


def test_step_one_pair_already_sorted_does_nothing(cache_dir):
    lay = build_layout("ladder:2x2")
    s = solvers_for(lay, cache_dir=cache_dir)
    op = LabeledOperator(BitMatrix.identity(4), [0, 1, 2, 3], 2)
    assert sort_two_block_labels(op, 0, 1, lay, s) == []
    op = LabeledOperator(BitMatrix.exchange(4), [0, 1, 2, 3], 2)
    assert sort_two_block_labels(op, 0, 2, lay, s) == []


def test_step_one_pair_keeps_invariant_three(cache_dir):
    lay = build_layout("ladder:2x2")
    s = solvers_for(lay, cache_dir=cache_dir)
    for seed in range(100):
        a = random_invertible(4, seed)
        upl = upl_decompose(a)
        op = LabeledOperator(upl.v, list(upl.labels), 2)
        assert check_invariant(3, op)
        sort_two_block_labels(op, 0, 1, lay, s)
        assert check_invariant(3, op)
        assert op.block_labels(0) == [0, 1]


def test_step_two_pair_keeps_invariant_four(cache_dir):
    lay = build_layout("ladder:3x2")
    s = solvers_for(lay, cache_dir=cache_dir)
    rng = random.Random(3)
    for _ in range(100):
        op = LabeledOperator(_random_block_northwest(6, 3, rng), [5 - r for r in range(6)], 3)
        sort_two_block_labels(op, 0, 2, lay, s)
        assert check_invariant(4, op)
        assert is_block_diagonal(op.a, 3)


# -- end-to-end synthesis -------------------------------------------------------------------

LAYOUTS = [
    "line:6",
    "line:9",
    "ladder:2x4",
    "ladder-diag:2x4",
    "ladder:3x3",
    "ladder-diag:3x3",
    "blocks-full:p=2,m=4",
    "blocks-full:p=3,m=3",
    "blocks-full:p=4,m=3",
    "blocks-full:p=5,m=2",
]


@pytest.mark.parametrize("desc", LAYOUTS)
def test_synthesis_end_to_end_with_invariant_checks(desc, cache_dir):
    lay = build_layout(desc)
    s = solvers_for(lay, cache_dir=cache_dir)
    for seed in range(25):
        a = random_invertible(lay.n, seed)
        res = synthesize(a, lay, s, debug=True)
        c = res.circuit
        assert np.array_equal(replay(lay.n, c.gates), as_array(a))
        assert check_compliance(c, lay.graph) == []
        assert asap_depth(lay.n, c.gates) <= res.bound == s.bound(lay.m)


@pytest.mark.parametrize("desc", ["line:4", "ladder:2x3", "blocks-full:p=4,m=2"])
def test_identity_synthesis(desc, cache_dir):
    lay = build_layout(desc)
    c = synth(BitMatrix.identity(lay.n), lay, solvers_for(lay, cache_dir=cache_dir), debug=True)
    assert simulate(c) == BitMatrix.identity(lay.n)


@settings(max_examples=25)
@given(st.sampled_from(["line:5", "ladder:2x3", "ladder-diag:2x3", "blocks-full:p=3,m=2"]), st.integers(0, 1 << 30))
def test_synthesis_property(desc, seed):
    lay = build_layout(desc)
    a = random_invertible(lay.n, seed)
    res = synthesize(a, lay, debug=True)
    assert simulate(res.circuit) == a
    assert check_compliance(res.circuit, lay.graph) == []
    assert depth(res.circuit) <= res.bound


def test_singular_and_mismatched_inputs():
    lay = build_layout("line:3")
    with pytest.raises(SingularMatrixError):
        synth(BitMatrix.zeros(3, 3), lay)
    with pytest.raises(ValueError):
        synth(BitMatrix.identity(4), lay)
    with pytest.raises(ValueError):
        synth(BitMatrix.identity(4), build_layout("ladder:2x2"), ClosedFormLine())


def test_broken_solver_trips_invariant_check(cache_dir):
    lay = build_layout("ladder:2x3")
    s = solvers_for(lay, cache_dir=cache_dir)

    class Lazy(type(s)):
        def p1(self, b):
            return []

    lazy = Lazy(s.p, s.local_graph, s.intra_graph, cache_dir=cache_dir)
    a = random_invertible(6, 1)
    while True:
        try:
            synthesize(a, lay, lazy, debug=True)
        except InvariantViolation:
            break
        a = random_invertible(6, a.rows[0] + 7)


def test_step_depths_add_up(cache_dir):
    lay = build_layout("ladder:2x5")
    res = synthesize(random_invertible(10, 3), lay, solvers_for(lay, cache_dir=cache_dir))
    assert len(res.step_depths) == 3
    assert depth(res.circuit) <= sum(res.step_depths)


# -- single-qubit path ----------------------------------------------------------------------


def test_lnn_examples():
    swap = BitMatrix.from_lists([[0, 1], [1, 0]])
    c = synth_lnn(swap)
    assert simulate(c) == swap and depth(c) <= 3
    for n in (1, 2, 5, 8):
        j = BitMatrix.exchange(n)
        assert simulate(synth_lnn(j)) == j
    for seed in range(30):
        a = random_invertible(16, seed)
        c = synth_lnn(a, debug=True)
        assert simulate(c) == a and depth(c) <= 80
        assert check_compliance(c, line(16).graph) == []


# -- re-blocking and combined layouts ---------------------------------------------------------


def test_re_block_exchange_needs_no_gates():
    tiles, _ = combined_layouts("grid:2x4")
    op = LabeledOperator(BitMatrix.exchange(8), list(range(8)), 4)
    assert re_block(op, 2, tiles) == []
    assert op.p == 2


def test_re_block_random_instances(cache_dir):
    tiles, _ = combined_layouts("grid:2x4")
    s = solvers_for(tiles, cache_dir=cache_dir)
    rng = random.Random(8)
    for _ in range(40):
        a = _random_block_northwest(8, 4, rng)
        op = LabeledOperator(a, list(range(8)), 4)
        layers_ = re_block(op, 2, tiles, s)
        assert is_block_northwest(op.a, 2)
        assert len(layers_) <= s.dstar
        # the applied gates account for the change
        applied = simulate(CnotCircuit(8, tuple(g for layer in layers_ for g in layer)))
        assert applied @ a == op.a
    with pytest.raises(ValueError):
        re_block(LabeledOperator(BitMatrix.identity(8), list(range(8)), 4), 2, tiles, s)
    with pytest.raises(ValueError):
        re_block(LabeledOperator(BitMatrix.exchange(8), list(range(8)), 4), 3, tiles, s)


@pytest.mark.parametrize("desc", ["grid:2x4", "grid:2x8", "altered-grid:4x4"])
def test_combined_synthesis(desc, cache_dir):
    tiles, dominoes = combined_layouts(desc)
    s1 = solvers_for(tiles, cache_dir=cache_dir)
    s2 = solvers_for(dominoes, cache_dir=cache_dir)
    edges = set(tiles.graph.edges) | set(dominoes.graph.edges)
    for seed in range(10):
        a = random_invertible(tiles.n, seed)
        res = synthesize_combined(a, tiles, dominoes, s1, s2, debug=True)
        c = res.circuit
        assert simulate(c) == a
        assert all((min(g.control, g.target), max(g.control, g.target)) in edges for g in c.gates)
        assert depth(c) <= res.bound
    ident = synth_combined(BitMatrix.identity(tiles.n), tiles, dominoes, s1, s2)
    assert simulate(ident) == BitMatrix.identity(tiles.n)


def test_combined_rejects_incompatible_layouts():
    with pytest.raises(ValueError):
        synth_combined(BitMatrix.identity(8), build_layout("ladder:2x4"), build_layout("ladder:4x2"))
