"""Compiled kernels for canonical-state search.

A state is a set of column vectors packed into one ``int64``: column ``c``
occupies bits ``[c * nb, (c + 1) * nb)``.  Columns are split into groups of
``group`` consecutive columns and each group is kept in reduced
column-echelon form; ``group == 0`` disables canonicalization.  A move is
given by its image table ``img[move, v]``, the image of column vector ``v``.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def canon_columns(cols, ncols, group, nb):
    if group == 0:
        return
    for s in range(0, ncols, group):
        end = s + group
        for i in range(s, end):
            # next pivot: the smallest lowest-set-bit among the remaining columns
            best = -1
            low = np.int64(0)
            for c in range(i, end):
                v = cols[c]
                if v:
                    lb = v & -v
                    if best < 0 or lb < low:
                        low = lb
                        best = c
            if best < 0:
                break
            pv = cols[best]
            cols[best] = cols[i]
            cols[i] = pv
            for c in range(s, end):
                if c != i and (cols[c] & low):
                    cols[c] ^= pv


@njit(cache=True, inline="always")
def unpack(key, cols, ncols, nb):
    mask = (np.int64(1) << nb) - 1
    for c in range(ncols):
        cols[c] = (key >> (c * nb)) & mask


@njit(cache=True, inline="always")
def pack(cols, ncols, nb):
    key = np.int64(0)
    for c in range(ncols):
        key |= cols[c] << (c * nb)
    return key


@njit(cache=True)
def canonical_key(key, ncols, group, nb):
    cols = np.empty(ncols, np.int64)
    unpack(key, cols, ncols, nb)
    canon_columns(cols, ncols, group, nb)
    return pack(cols, ncols, nb)


@njit(cache=True)
def apply_move(key, move, img, ncols, group, nb):
    cols = np.empty(ncols, np.int64)
    unpack(key, cols, ncols, nb)
    for c in range(ncols):
        cols[c] = img[move, cols[c]]
    canon_columns(cols, ncols, group, nb)
    return pack(cols, ncols, nb)


@njit(cache=True)
def walk_to_root(key, root, keys, moves, img, ncols, group, nb, limit):
    """Follow backpointer moves from ``key``; returns the move ids (or -1 on failure)."""
    path = np.empty(limit + 1, np.int64)
    n = 0
    while key != root:
        i = np.searchsorted(keys, key)
        if i >= keys.shape[0] or keys[i] != key or n >= limit:
            path[0] = -1
            return path[:1]
        mv = moves[i]
        path[n] = mv
        n += 1
        key = apply_move(key, mv, img, ncols, group, nb)
    return path[:n]


def image_table(move_gates, nb: int) -> np.ndarray:
    """``img[m, v]`` for every move (list of ``(control, target)`` pairs) and vector ``v``."""
    size = 1 << nb
    vec = np.arange(size, dtype=np.int64)
    img = np.empty((len(move_gates), size), np.int64)
    for m, gates in enumerate(move_gates):
        v = vec.copy()
        for c, t in gates:
            v ^= ((v >> c) & 1) << t
        img[m] = v
    return img


_HASH_MULT = np.int64(-7046029254386353131)


@njit(cache=True, inline="always")
def _slot(key, mask):
    return ((key * _HASH_MULT) >> 20) & mask


@njit(cache=True)
def hash_insert_all(hkeys, hdepth, hmove, keys, depths, moves):
    """Insert entries into an empty open-addressing table (key 0 marks a free slot)."""
    mask = hkeys.shape[0] - 1
    for i in range(keys.shape[0]):
        s = _slot(keys[i], mask)
        while hkeys[s] != 0:
            s = (s + 1) & mask
        hkeys[s] = keys[i]
        hdepth[s] = depths[i]
        hmove[s] = moves[i]


@njit(cache=True)
def bfs_layer(frontier, start, img, ncols, group, nb, hkeys, hdepth, hmove, depth, out, n_out, filled, max_fill):
    """Expand ``frontier[start:]`` into the hash table, appending new states to ``out``.

    Stops early when the table passes ``max_fill`` entries or ``out`` could
    overflow, returning ``(next_start, n_out, filled)`` so the caller can grow
    the buffers and resume.
    """
    n_moves = img.shape[0]
    mask = hkeys.shape[0] - 1
    base = np.empty(ncols, np.int64)
    cols = np.empty(ncols, np.int64)
    for f in range(start, frontier.shape[0]):
        if filled > max_fill or n_out + n_moves > out.shape[0]:
            return f, n_out, filled
        unpack(frontier[f], base, ncols, nb)
        for mv in range(n_moves):
            for c in range(ncols):
                cols[c] = img[mv, base[c]]
            canon_columns(cols, ncols, group, nb)
            key = pack(cols, ncols, nb)
            s = _slot(key, mask)
            while True:
                k = hkeys[s]
                if k == 0:
                    hkeys[s] = key
                    hdepth[s] = depth
                    hmove[s] = mv
                    out[n_out] = key
                    n_out += 1
                    filled += 1
                    break
                if k == key:
                    break
                s = (s + 1) & mask
    return frontier.shape[0], n_out, filled
