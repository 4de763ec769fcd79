"""Dense linear algebra over GF(2) on bit-packed rows.

Row ``i`` of a :class:`BitMatrix` is stored as a Python integer whose bit
``j`` is the entry ``A[i, j]``.  Row operations are single XORs, which is
what every synthesis routine in this package spends its time on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence


class SingularMatrixError(ValueError):
    """Raised when an operation needs an invertible matrix and gets a singular one."""


class BitMatrix:
    """Immutable boolean matrix with bit-packed rows."""

    __slots__ = ("_rows", "_n_cols")

    def __init__(self, rows: Iterable[int], n_cols: int):
        rows = tuple(int(r) for r in rows)
        if n_cols < 0:
            raise ValueError("n_cols must be non-negative")
        limit = 1 << n_cols
        for r in rows:
            if r < 0 or r >= limit:
                raise ValueError(f"row {r:#x} has bits beyond column {n_cols}")
        self._rows = rows
        self._n_cols = n_cols

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls((1 << i for i in range(n)), n)

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> BitMatrix:
        return cls([0] * n_rows, n_cols)

    @classmethod
    def exchange(cls, n: int) -> BitMatrix:
        """The anti-diagonal permutation matrix J_n."""
        return cls((1 << (n - 1 - i) for i in range(n)), n)

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[int]]) -> BitMatrix:
        if not entries:
            return cls([], 0)
        n_cols = len(entries[0])
        rows = []
        for line in entries:
            if len(line) != n_cols:
                raise ValueError("ragged matrix")
            row = 0
            for j, bit in enumerate(line):
                if bit not in (0, 1, True, False):
                    raise ValueError(f"entry {bit!r} is not a bit")
                if bit:
                    row |= 1 << j
            rows.append(row)
        return cls(rows, n_cols)

    @classmethod
    def from_columns(cls, columns: Sequence[int], n_rows: int) -> BitMatrix:
        """Build from column integers (bit ``i`` of column ``j`` is ``A[i, j]``)."""
        rows = [0] * n_rows
        for j, col in enumerate(columns):
            i = 0
            while col:
                if col & 1:
                    rows[i] |= 1 << j
                col >>= 1
                i += 1
        return cls(rows, len(columns))

    @classmethod
    def from_text(cls, text: str) -> BitMatrix:
        """Parse the ``0``/``1`` line format written by :meth:`to_text`."""
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines:
            raise ValueError("empty matrix text")
        width = len(lines[0])
        rows = []
        for k, ln in enumerate(lines):
            if len(ln) != width:
                raise ValueError(f"line {k} has {len(ln)} characters, expected {width}")
            if set(ln) - {"0", "1"}:
                raise ValueError(f"line {k} contains characters other than 0/1")
            rows.append(int(ln[::-1], 2))
        return cls(rows, width)

    # -- accessors --------------------------------------------------------

    @property
    def rows(self) -> tuple[int, ...]:
        return self._rows

    @property
    def n_rows(self) -> int:
        return len(self._rows)

    @property
    def n_cols(self) -> int:
        return self._n_cols

    @property
    def shape(self) -> tuple[int, int]:
        return len(self._rows), self._n_cols

    def is_square(self) -> bool:
        return len(self._rows) == self._n_cols

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        if not 0 <= j < self._n_cols:
            raise IndexError(j)
        return (self._rows[i] >> j) & 1

    def columns(self) -> list[int]:
        cols = [0] * self._n_cols
        for i, row in enumerate(self._rows):
            j = 0
            while row:
                if row & 1:
                    cols[j] |= 1 << i
                row >>= 1
                j += 1
        return cols

    def transpose(self) -> BitMatrix:
        return BitMatrix(self.columns(), len(self._rows))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> BitMatrix:
        out = []
        for i in rows:
            r = self._rows[i]
            v = 0
            for k, j in enumerate(cols):
                if (r >> j) & 1:
                    v |= 1 << k
            out.append(v)
        return BitMatrix(out, len(cols))

    def to_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self._n_cols)] for r in self._rows]

    def to_text(self) -> str:
        return "".join(
            "".join("1" if (r >> j) & 1 else "0" for j in range(self._n_cols)) + "\n"
            for r in self._rows
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self._n_cols == other._n_cols and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self._n_cols, self._rows))

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        return mat_mul(self, other)

    def __repr__(self) -> str:
        body = ", ".join("".join(str(b) for b in row) for row in self.to_lists())
        return f"BitMatrix([{body}])"


def row_add(m: BitMatrix, src: int, dst: int) -> BitMatrix:
    """Return ``m`` with row ``src`` XOR-ed into row ``dst`` (left product by E_{src,dst})."""
    n = m.n_rows
    if not (0 <= src < n and 0 <= dst < n):
        raise IndexError(f"row index out of range for {n} rows")
    if src == dst:
        raise ValueError("src and dst must differ")
    rows = list(m.rows)
    rows[dst] ^= rows[src]
    return BitMatrix(rows, m.n_cols)


def mat_mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    if a.n_cols != b.n_rows:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    brows = b.rows
    out = []
    for r in a.rows:
        acc = 0
        k = 0
        while r:
            if r & 1:
                acc ^= brows[k]
            r >>= 1
            k += 1
        out.append(acc)
    return BitMatrix(out, b.n_cols)


def rank(m: BitMatrix) -> int:
    rows = list(m.rows)
    r = 0
    # Swap-free elimination: each nonzero row claims its lowest bit as pivot.
    for i in range(len(rows)):
        v = rows[i]
        if not v:
            continue
        r += 1
        low = v & -v
        for k in range(i + 1, len(rows)):
            if rows[k] & low:
                rows[k] ^= v
    return r


def inverse(m: BitMatrix) -> BitMatrix:
    """Gauss-Jordan inverse; raises :class:`SingularMatrixError`."""
    if not m.is_square():
        raise ValueError(f"inverse of non-square {m.shape} matrix")
    n = m.n_rows
    rows = list(m.rows)
    inv = [1 << i for i in range(n)]
    for col in range(n):
        bit = 1 << col
        piv = next((r for r in range(col, n) if rows[r] & bit), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            inv[col], inv[piv] = inv[piv], inv[col]
        for r in range(n):
            if r != col and rows[r] & bit:
                rows[r] ^= rows[col]
                inv[r] ^= inv[col]
    return BitMatrix(inv, n)


def is_invertible(m: BitMatrix) -> bool:
    return m.is_square() and rank(m) == m.n_rows


def rcef_columns(columns: Sequence[int], n_rows: int) -> list[int]:
    """Reduced column-echelon form of a list of column integers.

    Pivot of a column is its topmost one (lowest set bit).  Pivot columns are
    ordered by increasing pivot row and zero columns are moved last.
    """
    cols = list(columns)
    g = len(cols)
    out = 0
    for r in range(n_rows):
        if out == g:
            break
        bit = 1 << r
        piv = next((c for c in range(out, g) if cols[c] & bit), None)
        if piv is None:
            continue
        cols[out], cols[piv] = cols[piv], cols[out]
        pv = cols[out]
        for c in range(g):
            if c != out and cols[c] & bit:
                cols[c] ^= pv
        out += 1
    return cols


def rcef(m: BitMatrix) -> BitMatrix:
    """Unique reduced column-echelon form of ``m`` under column operations."""
    return BitMatrix.from_columns(rcef_columns(m.columns(), m.n_rows), m.n_rows)


def is_northwest(m: BitMatrix) -> bool:
    """True iff ``m[i, j] == 0`` whenever ``i + j > n - 1``."""
    if not m.is_square():
        raise ValueError("north-west test needs a square matrix")
    n = m.n_rows
    for i, r in enumerate(m.rows):
        # allowed columns: j <= n - 1 - i
        if r >> (n - i):
            return False
    return True


@dataclass(frozen=True)
class UplResult:
    """Column-permuted upper triangular factor and its row labels."""

    v: BitMatrix
    labels: tuple[int, ...]


def upl_decompose(a: BitMatrix) -> UplResult:
    """Tuned LU decomposition.

    Returns ``V`` (upper triangular with permuted columns) and row labels such
    that ``V[i, labels[i]] == 1``, ``V[j, labels[i]] == 0`` for ``j > i`` and
    ``inverse(V) @ a`` is north-west triangular.  Pivot scanning goes from the
    last column and the last row downwards.
    """
    if not a.is_square():
        raise ValueError("UPL decomposition needs a square matrix")
    n = a.n_rows
    rows = list(a.rows)
    # U is kept column-wise: ucols[k] holds column k as a row-bit integer.
    ucols = [1 << k for k in range(n)]
    for i in range(n - 1, -1, -1):
        bit_i = 1 << i
        pivot = n - 1
        while pivot >= 0 and not rows[pivot] & bit_i:
            pivot -= 1
        if pivot < 0:
            raise SingularMatrixError("matrix is singular")
        prow = rows[pivot]
        for j in range(n):
            if j != pivot and rows[j] & bit_i:
                rows[j] ^= prow
                ucols[pivot] ^= ucols[j]
        # Column ops A[:, j] ^= A[:, i] for j < i where A[pivot, j] = 1.
        # Column i is now e_pivot, so this only clears row `pivot`.
        low = prow & (bit_i - 1)
        rows[pivot] = prow ^ low
    labels = []
    for i in range(n):
        r = rows[i]
        if not r:
            raise SingularMatrixError("matrix is singular")
        j = (r & -r).bit_length() - 1
        labels.append(n - j - 1)
    inv_labels = [0] * n
    for i, k in enumerate(labels):
        inv_labels[k] = i
    v = BitMatrix.from_columns([ucols[inv_labels[k]] for k in range(n)], n)
    return UplResult(v, tuple(labels))


def random_invertible(n: int, seed: int) -> BitMatrix:
    """Random invertible matrix; resamples until full rank.  Deterministic per seed."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = random.Random(seed)
    while True:
        m = BitMatrix([rng.getrandbits(n) for _ in range(n)], n)
        if rank(m) == n:
            return m


def random_full_rank(n_rows: int, n_cols: int, rng: random.Random) -> BitMatrix:
    """Random ``n_rows x n_cols`` matrix of rank ``min(n_rows, n_cols)``."""
    target = min(n_rows, n_cols)
    while True:
        m = BitMatrix([rng.getrandbits(n_cols) for _ in range(n_rows)], n_cols)
        if rank(m) == target:
            return m
