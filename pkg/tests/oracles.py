"""Reference implementations used as test oracles (numpy, no package internals)."""

from __future__ import annotations

import numpy as np


def as_array(m) -> np.ndarray:
    return np.array(m.to_lists(), dtype=np.uint8)


def gf2_rank(a: np.ndarray) -> int:
    a = a.copy() % 2
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i, c]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def gf2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            s = 0
            for k in range(a.shape[1]):
                s ^= int(a[i, k]) & int(b[k, j])
            out[i, j] = s
    return out


def replay(n: int, gates) -> np.ndarray:
    """Operator of a gate list, each gate given by ``.control`` and ``.target``."""
    out = np.eye(n, dtype=np.uint8)
    for g in gates:
        out[g.target] ^= out[g.control]
    return out


def asap_depth(n: int, gates) -> int:
    busy = [0] * n
    for g in gates:
        t = max(busy[g.control], busy[g.target]) + 1
        busy[g.control] = busy[g.target] = t
    return max(busy, default=0)


def random_invertible_array(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        a = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
        if gf2_rank(a) == n:
            return a
