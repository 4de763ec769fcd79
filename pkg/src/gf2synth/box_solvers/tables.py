"""Breadth-first depth tables over canonical local states, with a file cache.

Three local problems are supported, each on a fixed local graph:

* ``P1`` -- a full-rank ``2p x p`` matrix, canonicalized by its reduced
  column-echelon form.  Root: ``[I; 0]``.
* ``P2`` -- a ``2p x 2p`` matrix whose two ``p``-column halves are
  canonicalized separately.  Root: the identity.
* ``P3`` -- an invertible ``p x p`` matrix, no canonicalization.  Root: ``I``.

A table maps each reachable canonical state to its distance from the root and
to the move that takes one step back towards it.  Every move is a product of
CNOTs on disjoint qubits and hence an involution, so the distance from a state
to the root equals the distance from the root to the state.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import os
import struct
import time
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from ..cnot_circuit import CnotCircuit, CnotGate
from ..gf2_core import BitMatrix, rank
from ..topology import ConnectivityGraph, Move, oriented_matchings
from . import engine

log = logging.getLogger(__name__)

PROBLEMS = ("P1", "P2", "P3")
MAGIC = b"GF2SYNTH-DT\x01"
CACHE_ENV = "GF2SYNTH_CACHE"


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would visit more states than allowed."""

    def __init__(self, message: str, visited: int, counts: list[int]):
        super().__init__(message)
        self.visited = visited
        self.counts = counts


class TableLookupError(LookupError):
    """A state that must be in a table is missing (corrupt or mismatched table)."""


def normalize_problem(problem) -> str:
    text = str(problem).upper()
    if not text.startswith("P"):
        text = "P" + text
    if text not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    return text


@dataclass(frozen=True)
class LocalProblem:
    """State encoding and move set of one local problem on one local graph."""

    problem: str
    p: int
    graph: ConnectivityGraph

    def __post_init__(self):
        expected = self.p if self.problem == "P3" else 2 * self.p
        if self.graph.n != expected:
            raise ValueError(f"{self.problem} with p={self.p} needs a {expected}-vertex graph, got {self.graph.n}")
        if self.ncols * self.nb > 64:
            raise ValueError(f"{self.problem} with p={self.p} does not fit a 64-bit state key")

    @property
    def nb(self) -> int:
        return self.p if self.problem == "P3" else 2 * self.p

    @property
    def ncols(self) -> int:
        return 2 * self.p if self.problem == "P2" else self.p

    @property
    def group(self) -> int:
        return 0 if self.problem == "P3" else self.p

    @cached_property
    def moves(self) -> list[Move]:
        return oriented_matchings(self.graph)

    @cached_property
    def img(self) -> np.ndarray:
        return engine.image_table([[(g.control, g.target) for g in mv.gates] for mv in self.moves], self.nb)

    @cached_property
    def fingerprint(self) -> str:
        text = f"{self.problem}|p={self.p}|n={self.graph.n}|{self.graph.sorted_edges()}"
        return hashlib.sha1(text.encode()).hexdigest()[:20]

    @property
    def root(self) -> int:
        return self.pack_columns([1 << c for c in range(self.ncols)])

    def pack_columns(self, cols) -> int:
        key = 0
        for c, v in enumerate(cols):
            key |= int(v) << (c * self.nb)
        return _signed(key)

    def unpack_columns(self, key: int) -> list[int]:
        key &= (1 << 64) - 1
        mask = (1 << self.nb) - 1
        return [(key >> (c * self.nb)) & mask for c in range(self.ncols)]

    def canonical(self, key: int) -> int:
        return int(engine.canonical_key(np.int64(key), self.ncols, self.group, self.nb))

    def key_of(self, b: BitMatrix) -> int:
        """Canonical key of a matrix of the problem's shape."""
        rows = self.nb
        if b.shape != (rows, self.ncols):
            raise ValueError(f"{self.problem} with p={self.p} expects a {rows}x{self.ncols} matrix, got {b.shape}")
        return self.canonical(self.pack_columns(b.columns()))

    def step(self, key: int, move: int) -> int:
        return int(engine.apply_move(np.int64(key), move, self.img, self.ncols, self.group, self.nb))

    def instance_keys(self) -> np.ndarray:
        """Keys of the Problem-2 instance classes ``[X I; I 0]``, one per ``X``."""
        if self.problem != "P2":
            raise ValueError("instance classes are defined for P2 only")
        p = self.p
        keys = np.empty(1 << (p * p), np.int64)
        right = [1 << r for r in range(p)]
        for x in range(1 << (p * p)):
            # column c of the left half: X[:, c] on top, e_c below
            left = []
            for c in range(p):
                top = 0
                for r in range(p):
                    if (x >> (r * p + c)) & 1:
                        top |= 1 << r
                left.append(top | (1 << (p + c)))
            keys[x] = self.canonical(self.pack_columns(left + right))
        return keys

    def move_gates(self, move: int) -> tuple[CnotGate, ...]:
        return self.moves[move].gates


def _signed(key: int) -> int:
    key &= (1 << 64) - 1
    return key - (1 << 64) if key >> 63 else key


@dataclass
class DepthTable:
    """Solved form of one local problem.

    ``kind == "bfs"``: ``keys`` holds every reachable canonical state (sorted)
    with its depth and backpointer move; ``"ball"`` is the same restricted to
    a radius or a move subset.  ``kind == "search"`` (optimal) and
    ``"composite"`` (two-phase upper bound) hold only the Problem-2 instance
    classes, each with a stored move path.
    ``counts_by_depth`` is over all states for P1/P3 and over instance classes
    for P2.
    """

    local: LocalProblem
    kind: str
    keys: np.ndarray
    depths: np.ndarray
    moves: np.ndarray | None = None
    paths: list[np.ndarray] | None = None
    counts_by_depth: list[int] = field(default_factory=list)
    state_counts: list[int] = field(default_factory=list)
    root_key: int | None = None

    @property
    def problem(self) -> str:
        return self.local.problem

    @property
    def p(self) -> int:
        return self.local.p

    @property
    def fingerprint(self) -> str:
        return self.local.fingerprint

    @property
    def max_depth(self) -> int:
        return len(self.counts_by_depth) - 1

    @property
    def total(self) -> int:
        return int(sum(self.counts_by_depth))

    @property
    def root(self) -> int:
        return self.local.root if self.root_key is None else self.root_key

    def _index(self, key: int) -> int:
        i = int(np.searchsorted(self.keys, key))
        if i >= len(self.keys) or int(self.keys[i]) != key:
            raise TableLookupError(f"state {key:#x} not in {self.problem} table")
        return i

    def __contains__(self, key: int) -> bool:
        i = int(np.searchsorted(self.keys, key))
        return i < len(self.keys) and int(self.keys[i]) == key

    def depth_of(self, key: int) -> int:
        return int(self.depths[self._index(key)])

    def path(self, key: int) -> list[int]:
        """Move ids leading from ``key`` to the root, in application order."""
        i = self._index(key)
        if self.paths is not None:
            return [int(v) for v in self.paths[i]]
        d = int(self.depths[i])
        out = engine.walk_to_root(
            np.int64(key), np.int64(self.root), self.keys, self.moves, self.local.img,
            self.local.ncols, self.local.group, self.local.nb, d,
        )
        if len(out) != d or (d and out[0] < 0):
            raise TableLookupError(f"backpointer walk from {key:#x} failed")
        return [int(v) for v in out]

    def layers(self, key: int) -> list[tuple[CnotGate, ...]]:
        return [self.local.move_gates(m) for m in self.path(key)]

    def circuit(self, key: int) -> CnotCircuit:
        gates = [g for layer in self.layers(key) for g in layer]
        return CnotCircuit(self.local.graph.n, tuple(gates))

    def iter_entries(self):
        for k, d in zip(self.keys, self.depths):
            yield int(k), int(d)


def _histogram(depths: np.ndarray) -> list[int]:
    if len(depths) == 0:
        return []
    return [int(v) for v in np.bincount(depths.astype(np.int64))]


def bfs_table(
    problem,
    p: int,
    graph: ConnectivityGraph,
    budget: int | None = None,
    chunk: int = 1 << 22,
    progress: Callable[[int, int, int], None] | None = None,
    root: int | None = None,
    max_depth: int | None = None,
    move_subset: np.ndarray | None = None,
) -> DepthTable:
    """Layered breadth-first enumeration from the root.

    Visited states live in an open-addressing hash table that also stores the
    depth and the move that first reached each state.  Since moves are
    involutions, that move leads back one layer towards the root.

    Args:
        problem: ``"P1"``, ``"P2"`` or ``"P3"``.
        p: block size.
        graph: local graph (``2p`` vertices for P1/P2, ``p`` for P3).
        budget: maximum number of states; :class:`BudgetExceeded` beyond it.
        chunk: size of the next-layer buffer before it is flushed.
        progress: called as ``progress(depth, layer_size, visited)``.
        root: alternative canonical start state (default: the problem's root).
        max_depth: stop after this many layers; the result is then a ball
            around the root (``kind == "ball"``) rather than a full table.
        move_subset: restrict the search to these move ids.
    """
    local = LocalProblem(normalize_problem(problem), p, graph)
    img = local.img if move_subset is None else local.img[move_subset]
    n_moves = img.shape[0]
    root_key = local.root if root is None else local.canonical(root)
    cap = 1 << 12
    while cap < 8 * n_moves:
        cap <<= 1
    hkeys = np.zeros(cap, np.int64)
    hdepth = np.zeros(cap, np.uint8)
    hmove = np.zeros(cap, np.uint16)
    engine.hash_insert_all(hkeys, hdepth, hmove, np.array([root_key], np.int64),
                           np.zeros(1, np.uint8), np.zeros(1, np.uint16))
    filled = 1
    counts = [1]
    cur = np.array([root_key], np.int64)
    while len(cur) and (max_depth is None or len(counts) <= max_depth):
        depth = len(counts)
        out = np.empty(max(chunk, 2 * n_moves), np.int64)
        parts = []
        n_out = 0
        start = 0
        while start < len(cur):
            start, n_out, filled = engine.bfs_layer(
                cur, start, img, local.ncols, local.group, local.nb,
                hkeys, hdepth, hmove, depth, out, n_out, filled, cap // 2,
            )
            if budget is not None and filled > budget:
                raise BudgetExceeded(
                    f"{local.problem} p={p}: more than {budget} states", filled, counts + [n_out],
                )
            if start < len(cur):
                if filled > cap // 2:
                    hkeys, hdepth, hmove, cap = _grow(hkeys, hdepth, hmove)
                if n_out + n_moves > len(out):
                    parts.append(out[:n_out].copy())
                    n_out = 0
        parts.append(out[:n_out])
        cur = np.concatenate(parts)
        if not len(cur):
            break
        counts.append(len(cur))
        if progress:
            progress(depth, len(cur), filled)
    used = hkeys != 0
    keys = hkeys[used]
    depths = hdepth[used]
    moves = hmove[used]
    if move_subset is not None:
        moves = np.asarray(move_subset, np.uint16)[moves]
    order = np.argsort(keys)
    complete = max_depth is None or not len(cur) or len(counts) <= max_depth
    kind = "bfs" if complete and move_subset is None else "ball"
    table = DepthTable(local, kind, keys[order], depths[order], moves=moves[order])
    table.root_key = int(root_key)
    table.state_counts = counts
    if kind == "ball":
        table.counts_by_depth = list(counts)
    elif local.problem == "P2":
        inst = local.instance_keys()
        idx = np.searchsorted(table.keys, inst)
        table.counts_by_depth = _histogram(table.depths[idx])
    else:
        table.counts_by_depth = list(counts)
    return table


def _grow(hkeys, hdepth, hmove):
    used = hkeys != 0
    cap = 2 * len(hkeys)
    nk = np.zeros(cap, np.int64)
    nd = np.zeros(cap, np.uint8)
    nm = np.zeros(cap, np.uint16)
    engine.hash_insert_all(nk, nd, nm, hkeys[used], hdepth[used], hmove[used])
    return nk, nd, nm, cap


# -- cache file ---------------------------------------------------------------


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "gf2synth"


def cache_path(local: LocalProblem, cache_dir: Path | None = None) -> Path:
    base = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    return base / f"{local.problem}-p{local.p}-{local.fingerprint}.dt"


def save_table(table: DepthTable, path: Path) -> None:
    """Write ``MAGIC | u32 header length | JSON header | u64 count | records``.

    Records are ``(key u64, depth u8, move u16)`` for BFS tables and
    ``(key u64, depth u8, path u16[depth])`` for search tables.
    """
    local = table.local
    header = {
        "problem": local.problem,
        "p": local.p,
        "fingerprint": local.fingerprint,
        "edges": local.graph.sorted_edges(),
        "n_vertices": local.graph.n,
        "kind": table.kind,
        "counts_by_depth": table.counts_by_depth,
        "state_counts": table.state_counts,
    }
    blob = json.dumps(header).encode()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(struct.pack("<Q", len(table.keys)))
        if table.paths is None:
            rec = np.zeros(len(table.keys), dtype=[("key", "<i8"), ("depth", "u1"), ("move", "<u2")])
            rec["key"] = table.keys
            rec["depth"] = table.depths
            rec["move"] = table.moves
            fh.write(rec.tobytes())
        else:
            for k, d, pth in zip(table.keys, table.depths, table.paths):
                fh.write(struct.pack("<qB", int(k), int(d)))
                fh.write(np.asarray(pth, "<u2").tobytes())
    os.replace(tmp, path)


def load_table(path: Path, local: LocalProblem | None = None) -> DepthTable:
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise ValueError(f"{path}: not a depth-table file")
    pos = len(MAGIC)
    (hlen,) = struct.unpack_from("<I", data, pos)
    pos += 4
    header = json.loads(data[pos:pos + hlen])
    pos += hlen
    (count,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    graph = ConnectivityGraph(header["n_vertices"], [tuple(e) for e in header["edges"]])
    stored = LocalProblem(header["problem"], header["p"], graph)
    if stored.fingerprint != header["fingerprint"]:
        raise ValueError(f"{path}: fingerprint mismatch")
    if local is not None and local.fingerprint != stored.fingerprint:
        raise ValueError(f"{path}: table is for a different local problem")
    local = local or stored
    kind = header["kind"]
    if kind in ("bfs", "ball"):
        dt = np.dtype([("key", "<i8"), ("depth", "u1"), ("move", "<u2")])
        rec = np.frombuffer(data, dtype=dt, count=count, offset=pos)
        table = DepthTable(local, kind, rec["key"].copy(), rec["depth"].copy(), moves=rec["move"].copy())
    else:
        keys = np.empty(count, np.int64)
        depths = np.empty(count, np.uint8)
        paths = []
        for i in range(count):
            keys[i], depths[i] = struct.unpack_from("<qB", data, pos)
            pos += 9
            d = int(depths[i])
            paths.append(np.frombuffer(data, "<u2", count=d, offset=pos).astype(np.uint16))
            pos += 2 * d
        table = DepthTable(local, kind, keys, depths, paths=paths)
    table.counts_by_depth = list(header["counts_by_depth"])
    table.state_counts = list(header.get("state_counts", []))
    return table


_MEMO: dict[tuple[str, str], DepthTable] = {}


def get_table(
    problem,
    p: int,
    graph: ConnectivityGraph,
    cache_dir: Path | None = None,
    use_cache: bool = True,
    budget: int | None = None,
    progress: Callable[[int, int, int], None] | None = None,
) -> DepthTable:
    """Table for ``(problem, p, graph)``: from memory, then disk, else computed and saved.

    Problem-2 tables at ``p >= 4`` are too large for breadth-first search; they
    are built per instance class by
    :func:`gf2synth.box_solvers.search.composite_table` (upper bounds).
    """
    local = LocalProblem(normalize_problem(problem), p, graph)
    path = cache_path(local, cache_dir)
    # per cache location, so switching directories is honoured in-process
    memo_key = (local.fingerprint, str(path))
    if memo_key in _MEMO:
        return _MEMO[memo_key]
    table = None
    if use_cache and path.exists():
        try:
            table = load_table(path, local)
        except (ValueError, struct.error) as exc:
            log.warning("ignoring unreadable table cache %s: %s", path, exc)
    if table is None:
        start = time.perf_counter()
        if local.problem == "P2" and p >= 4:
            from .search import composite_table

            table = composite_table(local)
        else:
            table = bfs_table(local.problem, p, graph, budget=budget, progress=progress)
        log.info("built %s p=%d table in %.1fs", local.problem, p, time.perf_counter() - start)
        if use_cache:
            try:
                save_table(table, path)
            except OSError as exc:
                log.warning("could not write table cache %s: %s", path, exc)
    _MEMO[memo_key] = table
    return table


def gaussian_binomial_2(n: int, k: int) -> int:
    """Number of ``k``-dimensional subspaces of ``GF(2)^n``."""
    num = den = 1
    for i in range(k):
        num *= (1 << (n - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


def gl_order(p: int) -> int:
    """Order of ``GL(p, 2)``."""
    out = 1
    for i in range(p):
        out *= (1 << p) - (1 << i)
    return out


def count_rcef_forms(p: int) -> int:
    """Distinct reduced column-echelon forms of full-rank ``2p x p`` matrices, by brute force."""
    from ..gf2_core import rcef_columns

    seen = set()
    for cols in itertools.product(range(1, 1 << (2 * p)), repeat=p):
        if rank(BitMatrix.from_columns(cols, 2 * p)) == p:
            seen.add(tuple(rcef_columns(cols, 2 * p)))
    return len(seen)
