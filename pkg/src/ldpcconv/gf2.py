"""Sparse GF(2) matrices, binary polynomial matrices and their file formats.

Circulant convention used throughout the package: the monomial ``X**s``
modulo ``X**r - 1`` expands to the ``r x r`` permutation matrix ``I_s`` with
``I_s[j, i] = 1`` iff ``j == (i + s) % r``.  With this choice, multiplying a
coefficient vector by ``I_s`` is the same as multiplying the polynomial by
``X**s``, and ``I_s`` is the finite wrap-around of the Toeplitz matrix
``T_s`` (ones on the ``s``-th diagonal below the main one).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import gcd
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ParallelEdgeWarning",
    "SparseBinMatrix",
    "PolyMatrix",
    "DegreeProfile",
    "gf2_rank",
    "gf2_rref",
    "gf2_nullspace",
    "same_row_space",
    "expand_poly",
    "is_in_nullspace",
    "degree_profile",
    "poly_matvec",
    "expand_poly_vector",
    "read_alist",
    "write_alist",
    "format_alist",
    "parse_alist",
    "read_poly",
    "write_poly",
    "format_poly",
    "parse_poly",
]


class ParallelEdgeWarning(UserWarning):
    """Two shifted identities landed on the same position of a Tanner graph."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SparseBinMatrix:
    """Binary matrix stored as CSR support (no values, every stored entry is a 1).

    ``indices[indptr[j]:indptr[j+1]]`` are the strictly increasing column
    positions of the ones in row ``j``.
    """

    rows: int
    cols: int
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)

    def __post_init__(self):
        indptr = _frozen(self.indptr)
        indices = _frozen(self.indices)
        if indptr.shape != (self.rows + 1,) or indptr[0] != 0 or indptr[-1] != len(indices):
            raise ValueError("malformed CSR row pointer")
        if len(indices):
            if indices.min() < 0 or indices.max() >= self.cols:
                raise ValueError("column index out of range")
            if np.any(np.diff(indptr) < 0):
                raise ValueError("row pointer must be nondecreasing")
            rid = np.repeat(np.arange(self.rows), np.diff(indptr))
            if np.any((np.diff(indices) <= 0) & (np.diff(rid) == 0)):
                raise ValueError("column indices must be strictly increasing within a row")
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)

    # -- construction -----------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparseBinMatrix":
        return cls(rows, cols, np.zeros(rows + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))

    @classmethod
    def from_coords(cls, rows: int, cols: int, r_idx, c_idx, *, mode: str = "or") -> "SparseBinMatrix":
        """Build from coordinate lists.

        ``mode="or"`` keeps one entry per repeated position, ``mode="xor"``
        reduces multiplicities modulo 2.
        """
        r_idx = np.asarray(r_idx, dtype=np.int64).ravel()
        c_idx = np.asarray(c_idx, dtype=np.int64).ravel()
        if r_idx.shape != c_idx.shape:
            raise ValueError("coordinate arrays differ in length")
        if len(r_idx) and (r_idx.min() < 0 or r_idx.max() >= rows or c_idx.min() < 0 or c_idx.max() >= cols):
            raise ValueError("coordinate out of range")
        key = r_idx * max(cols, 1) + c_idx
        uniq, counts = np.unique(key, return_counts=True)
        if mode == "xor":
            uniq = uniq[counts % 2 == 1]
        elif mode != "or":
            raise ValueError(f"unknown mode {mode!r}")
        rr = uniq // max(cols, 1)
        cc = uniq % max(cols, 1)
        indptr = np.zeros(rows + 1, dtype=np.int64)
        np.add.at(indptr, rr + 1, 1)
        return cls(rows, cols, np.cumsum(indptr), cc)

    @classmethod
    def from_dense(cls, a) -> "SparseBinMatrix":
        a = np.asarray(a)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        r, c = np.nonzero(a % 2)
        return cls.from_coords(a.shape[0], a.shape[1], r, c)

    @classmethod
    def from_rows(cls, cols: int, supports: Iterable[Iterable[int]]) -> "SparseBinMatrix":
        supports = [sorted(set(int(x) for x in s)) for s in supports]
        indptr = np.cumsum([0] + [len(s) for s in supports])
        indices = np.array([x for s in supports for x in s], dtype=np.int64)
        return cls(len(supports), cols, indptr, indices)

    @classmethod
    def from_scipy(cls, m) -> "SparseBinMatrix":
        m = sp.coo_matrix(m)
        keep = (m.data % 2) != 0
        return cls.from_coords(m.shape[0], m.shape[1], m.row[keep], m.col[keep], mode="xor")

    # -- views ------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return int(len(self.indices))

    def row(self, j: int) -> np.ndarray:
        return self.indices[self.indptr[j]:self.indptr[j + 1]]

    def row_ids(self) -> np.ndarray:
        """Row index of every stored entry (parallel to ``indices``)."""
        return np.repeat(np.arange(self.rows, dtype=np.int64), np.diff(self.indptr))

    def supports(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in self.row(j)) for j in range(self.rows)]

    def to_dense(self, dtype=np.uint8) -> np.ndarray:
        out = np.zeros(self.shape, dtype=dtype)
        out[self.row_ids(), self.indices] = 1
        return out

    def to_scipy(self) -> sp.csr_matrix:
        data = np.ones(self.nnz, dtype=np.int64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=self.shape)

    @property
    def T(self) -> "SparseBinMatrix":
        return SparseBinMatrix.from_coords(self.cols, self.rows, self.indices, self.row_ids())

    def row_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def col_degrees(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.cols).astype(np.int64)

    def col_supports(self) -> list[np.ndarray]:
        t = self.T
        return [t.row(i) for i in range(t.rows)]

    # -- algebra ----------------------------------------------------------
    def syndrome(self, v) -> np.ndarray:
        """``M @ v`` over GF(2)."""
        v = np.asarray(v, dtype=np.int64).ravel() & 1
        if len(v) != self.cols:
            raise ValueError(f"vector length {len(v)} does not match {self.cols} columns")
        acc = np.bincount(self.row_ids(), weights=v[self.indices], minlength=self.rows)
        return acc.astype(np.int64) % 2

    def select_columns(self, keep) -> "SparseBinMatrix":
        """Keep the given columns (shortening when columns are dropped)."""
        keep = np.asarray(keep, dtype=np.int64)
        remap = -np.ones(self.cols, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        new_c = remap[self.indices]
        ok = new_c >= 0
        return SparseBinMatrix.from_coords(self.rows, len(keep), self.row_ids()[ok], new_c[ok])

    def select_rows(self, keep) -> "SparseBinMatrix":
        keep = np.asarray(keep, dtype=np.int64)
        return SparseBinMatrix.from_rows(self.cols, (self.row(j) for j in keep))

    def drop_zero_rows(self) -> "SparseBinMatrix":
        return self.select_rows(np.flatnonzero(self.row_degrees() > 0))

    def __add__(self, other: "SparseBinMatrix") -> "SparseBinMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return SparseBinMatrix.from_coords(
            self.rows, self.cols,
            np.concatenate([self.row_ids(), other.row_ids()]),
            np.concatenate([self.indices, other.indices]),
            mode="xor",
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseBinMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.indptr.tobytes(), self.indices.tobytes()))


def _as_sparse(M) -> SparseBinMatrix:
    return M if isinstance(M, SparseBinMatrix) else SparseBinMatrix.from_dense(M)


# ---------------------------------------------------------------------------
# Gaussian elimination on bit-packed rows
# ---------------------------------------------------------------------------

def _packed(M) -> tuple[np.ndarray, int]:
    dense = _as_sparse(M).to_dense(np.uint8) if not isinstance(M, np.ndarray) else (np.asarray(M) & 1).astype(np.uint8)
    return np.packbits(dense, axis=1), dense.shape[1]


def _eliminate(packed: np.ndarray, ncols: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form in place; returns (rows, pivot columns)."""
    a = packed
    m = a.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        byte, bit = divmod(c, 8)
        mask = np.uint8(0x80 >> bit)
        col = (a[r:, byte] & mask) != 0
        hits = np.flatnonzero(col)
        if len(hits) == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.flatnonzero((a[:, byte] & mask) != 0)
        others = others[others != r]
        if len(others):
            a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def gf2_rref(M) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2) as a dense 0/1 array plus pivot columns."""
    packed, n = _packed(M)
    red, piv = _eliminate(packed.copy(), n)
    return np.unpackbits(red, axis=1, count=n).astype(np.uint8), piv


def gf2_rank(M) -> int:
    packed, n = _packed(M)
    if packed.shape[0] == 0 or n == 0:
        return 0
    _, piv = _eliminate(packed.copy(), n)
    return len(piv)


def gf2_nullspace(M) -> np.ndarray:
    """Basis of ``{v : M v = 0}`` as rows of a dense 0/1 array."""
    rref, piv = gf2_rref(M)
    n = rref.shape[1] if rref.ndim == 2 and rref.shape[0] else _as_sparse(M).cols if not isinstance(M, np.ndarray) else np.asarray(M).shape[1]
    free = [c for c in range(n) if c not in set(piv)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        if piv:
            basis[k, piv] = rref[: len(piv), f]
    return basis


def same_row_space(A, B) -> bool:
    """True iff two GF(2) matrices with equal column count span the same row space."""
    ra, _ = gf2_rref(A)
    rb, _ = gf2_rref(B)
    return ra.shape == rb.shape and np.array_equal(ra, rb)


def is_in_nullspace(M, v) -> bool:
    M = _as_sparse(M)
    return not np.any(M.syndrome(v))


# ---------------------------------------------------------------------------
# Degree profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DegreeProfile:
    col_degrees: tuple[int, ...]
    row_degrees: tuple[int, ...]

    @property
    def regular(self) -> bool:
        return len(set(self.col_degrees)) <= 1 and len(set(self.row_degrees)) <= 1 and bool(self.col_degrees) and bool(self.row_degrees)

    @property
    def jk(self) -> tuple[int, int] | None:
        """``(J, K)`` for a regular profile, else ``None``."""
        if not self.regular:
            return None
        return self.col_degrees[0], self.row_degrees[0]

    def col_histogram(self) -> dict[int, int]:
        return _hist(self.col_degrees)

    def row_histogram(self) -> dict[int, int]:
        return _hist(self.row_degrees)


def _hist(values) -> dict[int, int]:
    out: dict[int, int] = {}
    for v in values:
        out[v] = out.get(v, 0) + 1
    return dict(sorted(out.items()))


def degree_profile(M) -> DegreeProfile:
    M = _as_sparse(M)
    return DegreeProfile(tuple(int(x) for x in M.col_degrees()), tuple(int(x) for x in M.row_degrees()))


# ---------------------------------------------------------------------------
# Polynomial matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyMatrix:
    """Matrix of binary polynomials, each stored as its set of exponents.

    ``modulus=r`` means the entries live in ``F2[X]/(X^r - 1)``;
    ``modulus=None`` is the delay (D) domain with unbounded exponents.
    """

    rows: int
    cols: int
    entries: tuple[tuple[frozenset, ...], ...]
    modulus: int | None = None

    def __post_init__(self):
        ent = tuple(tuple(frozenset(int(e) for e in cell) for cell in row) for row in self.entries)
        if len(ent) != self.rows or any(len(row) != self.cols for row in ent):
            raise ValueError("entry grid does not match the declared shape")
        if self.modulus is not None and self.modulus <= 0:
            raise ValueError("modulus must be a positive integer")
        for row in ent:
            for cell in row:
                if any(e < 0 for e in cell):
                    raise ValueError("exponents must be nonnegative")
                if self.modulus is not None and any(e >= self.modulus for e in cell):
                    raise ValueError(f"exponent >= modulus {self.modulus}")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def from_exponents(cls, grid: Sequence[Sequence], modulus: int | None = None) -> "PolyMatrix":
        """Build from a grid whose cells are an int (monomial), an iterable of
        ints, or ``None`` for the zero polynomial."""
        def cell(x):
            if x is None:
                return frozenset()
            if isinstance(x, (int, np.integer)):
                return frozenset([int(x)])
            return frozenset(int(e) for e in x)

        ent = tuple(tuple(cell(x) for x in row) for row in grid)
        cols = len(ent[0]) if ent else 0
        return cls(len(ent), cols, ent, modulus)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def max_exponent(self) -> int:
        """Largest exponent present (-1 for the all-zero matrix)."""
        return max((max(c) for row in self.entries for c in row if c), default=-1)

    def weight(self) -> int:
        return sum(len(c) for row in self.entries for c in row)

    def col_weights(self) -> list[int]:
        return [sum(len(self.entries[j][i]) for j in range(self.rows)) for i in range(self.cols)]

    def with_modulus(self, modulus: int | None) -> "PolyMatrix":
        return PolyMatrix(self.rows, self.cols, self.entries, modulus)

    def exponent_grid(self) -> list[list[list[int]]]:
        return [[sorted(c) for c in row] for row in self.entries]


def expand_poly(M: PolyMatrix) -> SparseBinMatrix:
    """Scalar (circulant) expansion of a matrix over ``F2[X]/(X^r-1)``."""
    if M.modulus is None:
        raise ValueError("expand_poly needs a modulus; D-domain matrices are convolutional codes")
    r = M.modulus
    rr, cc = [], []
    base = np.arange(r)
    collide = False
    for j, row in enumerate(M.entries):
        for i, cell in enumerate(row):
            for s in cell:
                rr.append(j * r + (base + s) % r)
                cc.append(i * r + base)
    if not rr:
        return SparseBinMatrix.zeros(M.rows * r, M.cols * r)
    rr = np.concatenate(rr)
    cc = np.concatenate(cc)
    out = SparseBinMatrix.from_coords(M.rows * r, M.cols * r, rr, cc)
    if out.nnz != len(rr):  # only possible for reduced-but-equal exponents, which sets exclude
        collide = True
    if collide:
        warnings.warn("coinciding circulant shifts in expand_poly", ParallelEdgeWarning, stacklevel=2)
    return out


def poly_matvec(M: PolyMatrix, v: Sequence[Iterable[int]]) -> list[frozenset]:
    """``M(X) v(X)^T`` with polynomial arithmetic (mod ``X^r-1`` if a modulus is set)."""
    if len(v) != M.cols:
        raise ValueError("vector length mismatch")
    r = M.modulus
    out = []
    for row in M.entries:
        acc: set[int] = set()
        for cell, vp in zip(row, v):
            for a in cell:
                for b in vp:
                    e = a + b if r is None else (a + b) % r
                    acc ^= {e}
        out.append(frozenset(acc))
    return out


def expand_poly_vector(v: Sequence[Iterable[int]], r: int) -> np.ndarray:
    """Coefficient vector of a polynomial vector over ``F2[X]/(X^r-1)``.

    Component ``i`` occupies positions ``i*r .. i*r+r-1``, coefficient of
    ``X^k`` at offset ``k``.
    """
    out = np.zeros(len(v) * r, dtype=np.uint8)
    for i, p in enumerate(v):
        for e in p:
            out[i * r + e % r] ^= 1
    return out


# ---------------------------------------------------------------------------
# alist I/O
# ---------------------------------------------------------------------------

def format_alist(M: SparseBinMatrix) -> str:
    M = _as_sparse(M)
    cols = M.col_supports()
    rows = [M.row(j) for j in range(M.rows)]
    cdeg = [len(c) for c in cols]
    rdeg = [len(r) for r in rows]
    maxc = max(cdeg, default=0)
    maxr = max(rdeg, default=0)

    def padded(lists, width):
        lines = []
        for lst in lists:
            vals = [int(x) + 1 for x in lst] + [0] * (width - len(lst))
            lines.append(" ".join(str(x) for x in vals))
        return lines

    lines = [f"{M.cols} {M.rows}", f"{maxc} {maxr}", " ".join(map(str, cdeg)), " ".join(map(str, rdeg))]
    lines += padded(cols, maxc)
    lines += padded(rows, maxr)
    return "\n".join(lines) + "\n"


def parse_alist(text: str) -> SparseBinMatrix:
    lines = text.splitlines()
    if len(lines) < 4:
        raise ValueError("alist needs at least four header lines")
    try:
        n, m = (int(x) for x in lines[0].split())
        maxc, maxr = (int(x) for x in lines[1].split())
        cdeg = [int(x) for x in lines[2].split()]
        rdeg = [int(x) for x in lines[3].split()]
    except ValueError as exc:
        raise ValueError(f"malformed alist header: {exc}") from None
    if len(cdeg) != n or len(rdeg) != m:
        raise ValueError("alist degree lines do not match the declared size")
    body = lines[4:]
    if len(body) < n + m:
        raise ValueError("alist is truncated")
    rr, cc = [], []
    for i in range(n):
        vals = [int(x) for x in body[i].split()]
        nz = [x for x in vals if x != 0]
        if len(nz) != cdeg[i]:
            raise ValueError(f"column {i} lists {len(nz)} entries, degree line says {cdeg[i]}")
        for x in nz:
            rr.append(x - 1)
            cc.append(i)
    M = SparseBinMatrix.from_coords(m, n, rr, cc)
    for j in range(m):
        vals = sorted(int(x) - 1 for x in body[n + j].split() if int(x) != 0)
        if len(vals) != rdeg[j] or vals != list(M.row(j)):
            raise ValueError(f"row {j} of the alist disagrees with the column lists")
    return M


def write_alist(M: SparseBinMatrix, path) -> None:
    Path(path).write_text(format_alist(M))


def read_alist(path) -> SparseBinMatrix:
    return parse_alist(Path(path).read_text())


# ---------------------------------------------------------------------------
# proto / polynomial text format
# ---------------------------------------------------------------------------

def format_poly(M: PolyMatrix) -> str:
    mod = "-" if M.modulus is None else str(M.modulus)
    lines = [f"{M.rows} {M.cols} {mod}"]
    for row in M.entries:
        lines.append(" ".join(",".join(str(e) for e in sorted(c)) if c else "-" for c in row))
    return "\n".join(lines) + "\n"


def parse_poly(text: str) -> PolyMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty polynomial matrix file")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError("header must read 'rows cols modulus'")
    rows, cols = int(head[0]), int(head[1])
    modulus = None if head[2] == "-" else int(head[2])
    if len(lines) - 1 != rows:
        raise ValueError(f"expected {rows} matrix rows, found {len(lines) - 1}")
    grid = []
    for ln in lines[1:]:
        cells = ln.split()
        if len(cells) != cols:
            raise ValueError(f"expected {cols} cells per row, got {len(cells)}")
        grid.append([None if c == "-" else [int(e) for e in c.split(",")] for c in cells])
    return PolyMatrix.from_exponents(grid, modulus)


def write_poly(M: PolyMatrix, path) -> None:
    Path(path).write_text(format_poly(M))


def read_poly(path) -> PolyMatrix:
    return parse_poly(Path(path).read_text())


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)
