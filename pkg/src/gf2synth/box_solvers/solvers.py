"""Per-architecture local solver bundles used by the block synthesis driver.

A bundle answers the three local problems for one layout and reports the
worst-case depths ``d1``, ``d2`` and ``dstar`` that enter the depth bound
``m (d1 + d2) + dstar``.  All inputs and outputs use the local qubit order of
the layout's pair and block maps.
"""

from __future__ import annotations

from pathlib import Path

from ..gf2_core import BitMatrix, SingularMatrixError, inverse, is_invertible
from ..topology import BlockLineLayout, ConnectivityGraph
from . import alltoall
from .boxes import Layers, box_p1_closed, box_p2_closed, check_p2_instance, p1_layers, p2_layers, p3_layers
from .tables import DepthTable, get_table

STRATEGIES = ("auto", "closed-form", "tables", "alltoall")

# largest block size the P3 table on a complete graph stays small for
_MAX_P3_TABLE = 4


class LocalSolvers:
    """Interface: ``p1``, ``p2`` and ``p3`` return lists of parallel gate layers."""

    name = "abstract"
    p: int

    @property
    def d1(self) -> int:
        raise NotImplementedError

    @property
    def d2(self) -> int:
        raise NotImplementedError

    @property
    def dstar(self) -> int:
        raise NotImplementedError

    def p1(self, b: BitMatrix) -> Layers:
        raise NotImplementedError

    def p2(self, b: BitMatrix) -> Layers:
        raise NotImplementedError

    def p3(self, a: BitMatrix) -> Layers:
        raise NotImplementedError

    def bound(self, m: int) -> int:
        """Depth bound of the three-step synthesis on ``m`` blocks."""
        return m * (self.d1 + self.d2) + self.dstar

    def describe(self) -> dict:
        return {"strategy": self.name, "p": self.p, "d1": self.d1, "d2": self.d2, "dstar": self.dstar}


def _as_layers(circuit) -> Layers:
    return [(g,) for g in circuit.gates]


class ClosedFormLine(LocalSolvers):
    """Single-qubit blocks on a path: two- and three-CNOT boxes."""

    name = "closed-form"
    p = 1

    @property
    def d1(self) -> int:
        return 2

    @property
    def d2(self) -> int:
        return 3

    @property
    def dstar(self) -> int:
        return 0

    def p1(self, b: BitMatrix) -> Layers:
        if b.shape != (2, 1):
            raise ValueError(f"Problem 1 needs a 2x1 matrix, got {b.shape}")
        top, bottom = b[0, 0], b[1, 0]
        if not bottom:
            if not top:
                raise SingularMatrixError("Problem 1 input is not full rank")
            return []
        return _as_layers(box_p1_closed(BitMatrix.from_lists([[1, top], [0, 1]])))

    def p2(self, b: BitMatrix) -> Layers:
        check_p2_instance(b, 1)
        # b = [[x, 1], [1, 0]]; the box acts on [[1, x], [0, 1]] (columns swapped)
        return _as_layers(box_p2_closed(BitMatrix.from_lists([[1, b[0, 0]], [0, 1]]), False))

    def p3(self, a: BitMatrix) -> Layers:
        if a.shape != (1, 1) or not a[0, 0]:
            raise SingularMatrixError("Problem 3 input is singular")
        return []


class TableSolvers(LocalSolvers):
    """Depth-optimal (or best-known) local circuits from precomputed tables.

    Tables are built on first use and cached on disk.
    """

    name = "tables"

    def __init__(
        self,
        p: int,
        local_graph: ConnectivityGraph,
        intra_graph: ConnectivityGraph,
        cache_dir: Path | None = None,
        use_cache: bool = True,
    ):
        self.p = p
        self.local_graph = local_graph
        self.intra_graph = intra_graph
        self.cache_dir = cache_dir
        self.use_cache = use_cache

    def table(self, problem: str) -> DepthTable:
        graph = self.intra_graph if problem == "P3" else self.local_graph
        return get_table(problem, self.p, graph, cache_dir=self.cache_dir, use_cache=self.use_cache)

    @property
    def d1(self) -> int:
        return self.table("P1").max_depth

    @property
    def d2(self) -> int:
        return self.table("P2").max_depth

    @property
    def dstar(self) -> int:
        return self.table("P3").max_depth

    def p1(self, b: BitMatrix) -> Layers:
        return p1_layers(b, self.table("P1"))

    def p2(self, b: BitMatrix) -> Layers:
        return p2_layers(b, self.table("P2"))

    def p3(self, a: BitMatrix) -> Layers:
        return p3_layers(a, self.table("P3"))


class AllToAllSolvers(LocalSolvers):
    """Analytic solvers for neighbouring blocks with complete connectivity.

    Problem 3 uses a table on the complete graph for ``p <= 4`` and the
    single-qubit path synthesis inside the block otherwise.
    """

    name = "alltoall"

    def __init__(self, p: int, mode: str = "basic", cache_dir: Path | None = None, use_cache: bool = True):
        if mode not in alltoall.MODES:
            raise ValueError(f"mode must be one of {alltoall.MODES}, got {mode!r}")
        self.p = p
        self.mode = mode
        self.cache_dir = cache_dir
        self.use_cache = use_cache

    @property
    def d1(self) -> int:
        return alltoall.p1_bound(self.p, self.mode)

    @property
    def d2(self) -> int:
        return alltoall.p2_bound(self.p, self.mode)

    @property
    def dstar(self) -> int:
        if self.p <= _MAX_P3_TABLE:
            return self._p3_table().max_depth
        return 5 * self.p

    def _p3_table(self) -> DepthTable:
        return get_table(
            "P3", self.p, ConnectivityGraph.complete(self.p), cache_dir=self.cache_dir, use_cache=self.use_cache
        )

    def p1(self, b: BitMatrix) -> Layers:
        return alltoall.alltoall_p1_layers(b, self.mode)

    def p2(self, b: BitMatrix) -> Layers:
        return alltoall.alltoall_p2_layers(b, self.mode)

    def p3(self, a: BitMatrix) -> Layers:
        if self.p <= _MAX_P3_TABLE:
            return p3_layers(a, self._p3_table())
        from ..block_synth import layered_gates, synth_lnn

        if not is_invertible(a):
            raise SingularMatrixError("Problem 3 input is singular")
        # the reduction C a = I implements the inverse
        return layered_gates(synth_lnn(inverse(a)))

    def describe(self) -> dict:
        return {**super().describe(), "mode": self.mode}


def solvers_for(
    layout: BlockLineLayout,
    strategy: str = "auto",
    mode: str = "basic",
    cache_dir: Path | None = None,
    use_cache: bool = True,
) -> LocalSolvers:
    """Pick the local solvers for a layout.

    ``auto`` uses closed-form boxes for single-qubit blocks, the analytic
    construction for complete block pairs with ``p >= 4`` and tables otherwise.

    Raises:
        ValueError: for an unknown strategy or one that does not fit the layout.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    p = layout.p
    complete_pairs = len(layout.local_graph.edges) == p * (2 * p - 1)
    if strategy == "auto":
        if p == 1:
            strategy = "closed-form"
        elif complete_pairs and p >= 4:
            strategy = "alltoall"
        else:
            strategy = "tables"
    if strategy == "closed-form":
        if p != 1:
            raise ValueError("closed-form boxes need single-qubit blocks")
        return ClosedFormLine()
    if strategy == "alltoall":
        if not complete_pairs:
            raise ValueError(f"{layout.descriptor} does not connect neighbouring blocks completely")
        return AllToAllSolvers(p, mode, cache_dir=cache_dir, use_cache=use_cache)
    if p > 4:
        raise ValueError(f"tables are limited to p <= 4, got p={p}")
    return TableSolvers(p, layout.local_graph, layout.intra_graph, cache_dir=cache_dir, use_cache=use_cache)


__all__ = [
    "STRATEGIES",
    "AllToAllSolvers",
    "ClosedFormLine",
    "LocalSolvers",
    "TableSolvers",
    "solvers_for",
]
