"""Depth-bounded synthesis of CNOT circuits on constrained qubit architectures."""

from .block_synth import (
    LabeledOperator,
    check_invariant,
    re_block,
    sort_two_block_labels,
    sorting_network,
    synth,
    synth_combined,
    synth_lnn,
    synthesize,
    synthesize_combined,
)
from .cnot_circuit import CnotCircuit, CnotGate, check_compliance, depth, reverse, simulate
from .gf2_core import BitMatrix, SingularMatrixError, inverse, random_invertible, rank, rcef, upl_decompose
from .topology import BlockLineLayout, ConnectivityGraph, build_layout, combined_layouts

__version__ = "0.1.0"

__all__ = [
    "BitMatrix",
    "BlockLineLayout",
    "CnotCircuit",
    "CnotGate",
    "ConnectivityGraph",
    "LabeledOperator",
    "SingularMatrixError",
    "build_layout",
    "check_compliance",
    "check_invariant",
    "combined_layouts",
    "depth",
    "inverse",
    "random_invertible",
    "rank",
    "rcef",
    "re_block",
    "reverse",
    "simulate",
    "sort_two_block_labels",
    "sorting_network",
    "synth",
    "synth_combined",
    "synth_lnn",
    "synthesize",
    "synthesize_combined",
    "upl_decompose",
]
