from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gf2synth.cnot_circuit import (
    CnotCircuit,
    CnotGate,
    check_compliance,
    circuit_from_pairs,
    depth,
    layers,
    reverse,
    simulate,
)
from gf2synth.gf2_core import BitMatrix
from gf2synth.topology import ConnectivityGraph
from oracles import as_array, asap_depth, replay


@st.composite
def circuits(draw, max_n: int = 6, max_len: int = 25):
    n = draw(st.integers(2, max_n))
    pairs = draw(
        st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda t: t[0] != t[1]),
            max_size=max_len,
        )
    )
    return circuit_from_pairs(n, pairs)


def test_gate_rejects_equal_endpoints():
    with pytest.raises(ValueError):
        CnotGate(1, 1)


def test_circuit_rejects_out_of_range_gate():
    with pytest.raises(ValueError):
        CnotCircuit(2, (CnotGate(0, 2),))


def test_simulate_examples():
    assert simulate(CnotCircuit(3)) == BitMatrix.identity(3)
    assert simulate(circuit_from_pairs(2, [(0, 1)])) == BitMatrix.from_lists([[1, 0], [1, 1]])
    swap = circuit_from_pairs(2, [(0, 1), (1, 0), (0, 1)])
    assert simulate(swap) == BitMatrix.from_lists([[0, 1], [1, 0]])


@given(circuits())
def test_simulate_matches_replay_oracle(c):
    assert np.array_equal(as_array(simulate(c)), replay(c.n_qubits, c.gates))


@given(circuits(), st.data())
def test_concatenation_composes_in_matrix_order(c1, data):
    pairs = data.draw(st.lists(st.sampled_from([(a, b) for a in range(c1.n_qubits) for b in range(c1.n_qubits) if a != b])))
    c2 = circuit_from_pairs(c1.n_qubits, pairs)
    assert simulate(c1 + c2) == simulate(c2) @ simulate(c1)


def test_depth_examples():
    assert depth(circuit_from_pairs(4, [(0, 1), (2, 3)])) == 1
    assert depth(circuit_from_pairs(3, [(0, 1), (1, 2)])) == 2
    assert depth(CnotCircuit(3)) == 0


@given(circuits())
def test_depth_matches_oracle_and_gate_count(c):
    d = depth(c)
    assert d == asap_depth(c.n_qubits, c.gates)
    assert d <= len(c.gates)
    assert sum(len(layer) for layer in layers(c)) == len(c.gates)


@given(circuits(), st.randoms(use_true_random=False))
def test_depth_invariant_under_commuting_disjoint_neighbours(c, rnd):
    gates = list(c.gates)
    for _ in range(20):
        if len(gates) < 2:
            break
        k = rnd.randrange(len(gates) - 1)
        a, b = gates[k], gates[k + 1]
        if {a.control, a.target}.isdisjoint({b.control, b.target}):
            gates[k], gates[k + 1] = b, a
    shuffled = CnotCircuit(c.n_qubits, tuple(gates))
    assert depth(shuffled) == depth(c)
    assert simulate(shuffled) == simulate(c)


def test_compliance_examples():
    c = circuit_from_pairs(3, [(0, 2)])
    assert check_compliance(c, ConnectivityGraph.complete(3)) == []
    assert len(check_compliance(c, ConnectivityGraph.path(3))) == 1
    with pytest.raises(ValueError):
        check_compliance(c, ConnectivityGraph.path(4))


@given(circuits(), st.data())
def test_compliance_monotone_in_edges(c, data):
    n = c.n_qubits
    all_edges = [(a, b) for a in range(n) for b in range(a + 1, n)]
    base = data.draw(st.lists(st.sampled_from(all_edges), unique=True))
    extra = data.draw(st.lists(st.sampled_from(all_edges), unique=True))
    before = {i for i, _ in check_compliance(c, ConnectivityGraph(n, base))}
    after = {i for i, _ in check_compliance(c, ConnectivityGraph(n, base + extra))}
    assert after <= before


def test_reverse_examples():
    assert reverse(CnotCircuit(2)).gates == ()
    single = circuit_from_pairs(2, [(1, 0)])
    assert reverse(single) == single
    rng = random.Random(9)
    for _ in range(20):
        pairs = [tuple(rng.sample(range(5), 2)) for _ in range(20)]
        c = circuit_from_pairs(5, pairs)
        assert simulate(reverse(c)) @ simulate(c) == BitMatrix.identity(5)


def test_text_round_trip_and_comments():
    c = circuit_from_pairs(4, [(0, 1), (3, 2)])
    text = c.to_text()
    assert text.splitlines()[0] == "qubits 4"
    assert CnotCircuit.from_text(text) == c
    assert CnotCircuit.from_text("# note\nqubits 2\n# gate\nCNOT 1 0\n") == circuit_from_pairs(2, [(1, 0)])
    assert CnotCircuit.from_text(c.to_text()).to_text() == text


@pytest.mark.parametrize("bad", ["CNOT 0 1\n", "qubits 2\nCNOT 0\n", "qubits 2\nCZ 0 1\n", "qubits 2\nCNOT 0 5\n"])
def test_text_parse_errors(bad):
    with pytest.raises(ValueError):
        CnotCircuit.from_text(bad)
