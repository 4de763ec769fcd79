"""Exact per-instance Problem-2 search for blocks too large to tabulate.

At ``p = 4`` the Problem-2 state graph has about ``1.3e10`` canonical states,
far beyond a breadth-first table.  Instead, each of the ``2^(p*p)`` instance
classes is solved by iterative-deepening A* towards a precomputed ball around
the root:

* inside the ball (radius ``R``) the distance to the root is known exactly;
* outside it, ``h = max(R + 1, d1(left half -> top), d1(right half -> bottom))``
  where ``d1`` comes from two Problem-1 tables.  Both terms are lower bounds,
  since any solution moves each half onto its target subspace.

Only move sequences in as-soon-as-possible form are explored: every gate of a
move must share a qubit with the previous move, otherwise it could be moved
one layer earlier without changing the product.  Results are therefore optimal.
"""

from __future__ import annotations

import logging
import time

import numpy as np
from numba import njit

from . import engine
from .tables import DepthTable, LocalProblem, bfs_table

log = logging.getLogger(__name__)

DEFAULT_RADIUS = 4


@njit(cache=True)
def _lookup(keys, depths, key):
    i = np.searchsorted(keys, key)
    if i < keys.shape[0] and keys[i] == key:
        return np.int64(depths[i])
    return np.int64(-1)


@njit(cache=True)
def _h_outside(cols, p, nb, top_k, top_d, bot_k, bot_d, radius):
    left = np.int64(0)
    right = np.int64(0)
    for c in range(p):
        left |= cols[c] << (c * nb)
        right |= cols[p + c] << (c * nb)
    h = radius + 1
    a = _lookup(top_k, top_d, left)
    if a > h:
        h = a
    b = _lookup(bot_k, bot_d, right)
    if b > h:
        h = b
    return h


@njit(cache=True)
def _ida(start, img, p, succ_ptr, succ_idx, top_k, top_d, bot_k, bot_d,
         ball_k, ball_d, radius, max_bound, node_limit):
    """Returns ``(prefix moves, ball key reached, nodes expanded)``; empty prefix and -1 on failure."""
    ncols = 2 * p
    nb = 2 * p
    n_moves = img.shape[0]
    cols = np.empty(ncols, np.int64)
    engine.unpack(start, cols, ncols, nb)
    e0 = _lookup(ball_k, ball_d, start)
    if e0 >= 0:
        return np.empty(0, np.int64), start, np.int64(0)
    bound = _h_outside(cols, p, nb, top_k, top_d, bot_k, bot_d, radius)
    stack_cols = np.empty((max_bound + 2, ncols), np.int64)
    stack_move = np.empty(max_bound + 2, np.int64)
    stack_iter = np.empty(max_bound + 2, np.int64)
    child = np.empty(ncols, np.int64)
    nodes = np.int64(0)
    while bound <= max_bound:
        stack_cols[0, :] = cols
        stack_move[0] = -1
        stack_iter[0] = 0
        level = 0
        while level >= 0:
            prev = stack_move[level]
            if prev < 0:
                count = n_moves
            else:
                count = succ_ptr[prev + 1] - succ_ptr[prev]
            it = stack_iter[level]
            if it >= count:
                level -= 1
                continue
            stack_iter[level] = it + 1
            mv = it if prev < 0 else succ_idx[succ_ptr[prev] + it]
            if mv == prev:
                continue
            nodes += 1
            if nodes > node_limit:
                return np.empty(0, np.int64), np.int64(-1), nodes
            for c in range(ncols):
                child[c] = img[mv, stack_cols[level, c]]
            engine.canon_columns(child, ncols, p, nb)
            g = level + 1
            key = engine.pack(child, ncols, nb)
            e = _lookup(ball_k, ball_d, key)
            if e >= 0:
                if g + e <= bound:
                    out = np.empty(g, np.int64)
                    for k in range(1, level + 1):
                        out[k - 1] = stack_move[k]
                    out[g - 1] = mv
                    return out, key, nodes
                continue
            if g + _h_outside(child, p, nb, top_k, top_d, bot_k, bot_d, radius) > bound:
                continue
            level = g
            stack_cols[level, :] = child
            stack_move[level] = mv
            stack_iter[level] = 0
        bound += 1
    return np.empty(0, np.int64), np.int64(-1), nodes


def successor_lists(local: LocalProblem) -> tuple[np.ndarray, np.ndarray]:
    """CSR lists of the moves allowed right after each move (as-soon-as-possible form)."""
    supports = [mv.support for mv in local.moves]
    gate_masks = [[(1 << g.control) | (1 << g.target) for g in mv.gates] for mv in local.moves]
    ptr = [0]
    idx: list[int] = []
    for s in supports:
        for j, masks in enumerate(gate_masks):
            if all(m & s for m in masks):
                idx.append(j)
        ptr.append(len(idx))
    return np.array(ptr, np.int64), np.array(idx, np.int64)


class P2Searcher:
    """Optimal Problem-2 solver for one local graph, built on the ball and two P1 tables."""

    def __init__(self, local: LocalProblem, radius: int = DEFAULT_RADIUS):
        if local.problem != "P2":
            raise ValueError("P2Searcher needs a P2 local problem")
        self.local = local
        self.radius = radius
        p = local.p
        top = bfs_table("P1", p, local.graph)
        bottom = bfs_table("P1", p, local.graph, root=_pack([1 << (p + c) for c in range(p)], 2 * p))
        self.top_k, self.top_d = top.keys, top.depths
        self.bot_k, self.bot_d = bottom.keys, bottom.depths
        self.ball = bfs_table("P2", p, local.graph, max_depth=radius)
        self.succ_ptr, self.succ_idx = successor_lists(local)

    def solve_key(self, key: int, max_depth: int = 32, node_limit: int = 1 << 40) -> list[int]:
        """Shortest move path from canonical ``key`` to the root."""
        prefix, reached, _ = _ida(
            np.int64(key), self.local.img, self.local.p, self.succ_ptr, self.succ_idx,
            self.top_k, self.top_d, self.bot_k, self.bot_d,
            self.ball.keys, self.ball.depths, self.radius, max_depth, node_limit,
        )
        if reached == -1:
            raise RuntimeError(f"no Problem-2 solution within depth {max_depth} for state {key:#x}")
        return [int(m) for m in prefix] + self.ball.path(int(reached))


def _pack(cols, nb):
    key = 0
    for c, v in enumerate(cols):
        key |= v << (c * nb)
    return key


def search_table(local: LocalProblem, radius: int = DEFAULT_RADIUS, progress=None) -> DepthTable:
    """Solve every Problem-2 instance class optimally and store the paths."""
    searcher = P2Searcher(local, radius)
    inst = np.unique(local.instance_keys())
    paths = []
    start = time.perf_counter()
    for i, key in enumerate(inst):
        paths.append(np.array(searcher.solve_key(int(key)), np.uint16))
        if progress and (i + 1) % 1024 == 0:
            progress(i + 1, len(inst), time.perf_counter() - start)
    depths = np.array([len(pth) for pth in paths], np.uint8)
    table = DepthTable(local, "search", inst, depths, paths=paths)
    table.counts_by_depth = [int(v) for v in np.bincount(depths)]
    return table


def _crossing_moves(local: LocalProblem, from_top: bool) -> np.ndarray:
    """Ids of moves with no gate whose control is on the given side and target on the other."""
    p = local.p
    keep = []
    for i, mv in enumerate(local.moves):
        bad = any((g.control < p) == from_top and (g.target < p) != from_top for g in mv.gates)
        if not bad:
            keep.append(i)
    return np.array(keep, np.int64)


def composite_table(local: LocalProblem, progress=None) -> DepthTable:
    """Two-phase Problem-2 solutions for every instance class (upper bounds, not optimal).

    Phase one moves one half onto its target subspace along a shortest
    Problem-1 path.  Phase two finishes with a breadth-first table over the
    moves that keep that half fixed (no gate from its side into the other).
    Both orders are tried and the shorter result is kept.
    """
    p = local.p
    top = bfs_table("P1", p, local.graph)
    bottom = bfs_table("P1", p, local.graph, root=_pack([1 << (p + c) for c in range(p)], 2 * p))
    keep_top = bfs_table("P2", p, local.graph, move_subset=_crossing_moves(local, True))
    keep_bottom = bfs_table("P2", p, local.graph, move_subset=_crossing_moves(local, False))
    p1 = LocalProblem("P1", p, local.graph)
    inst = np.unique(local.instance_keys())
    paths = []
    start = time.perf_counter()
    for i, key in enumerate(inst):
        cols = local.unpack_columns(int(key))
        best = None
        for half_table, finish, first in ((top, keep_top, 0), (bottom, keep_bottom, p)):
            half = p1.canonical(p1.pack_columns(cols[first:first + p]))
            path = half_table.path(half)
            state = int(key)
            for mv in path:
                state = local.step(state, mv)
            path = path + finish.path(state)
            if best is None or len(path) < len(best):
                best = path
        paths.append(np.array(best, np.uint16))
        if progress and (i + 1) % 4096 == 0:
            progress(i + 1, len(inst), time.perf_counter() - start)
    depths = np.array([len(pth) for pth in paths], np.uint8)
    table = DepthTable(local, "composite", inst, depths, paths=paths)
    table.counts_by_depth = [int(v) for v in np.bincount(depths)]
    return table
