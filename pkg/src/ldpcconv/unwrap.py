"""Turning block codes into convolutional codes and back.

Two routes are provided.  Polynomial unwrapping keeps the exponent sets of
a quasi-cyclic matrix and forgets the modulus.  Matrix-decomposition
unwrapping splits a scalar parity-check matrix ``H = H_0 + ... + H_k`` (over
the integers) and repeats the parts down a diagonal band.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import gcd
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .convcode import ConvCode, unblock
from .cover import CoverSpec, ToeplitzShift
from .gf2 import ParallelEdgeWarning, PolyMatrix, SparseBinMatrix, read_alist, write_alist

__all__ = [
    "CutParams",
    "Decomposition",
    "cut_params",
    "tanner_unwrap",
    "tanner_wrap",
    "wrap_stream",
    "reduce_memory",
    "jfz_diagonal_cut",
    "jfz_random_cut",
    "jfz_unwrap",
    "diagonal_cut_code",
    "diagonal_cut_offsets",
    "diagonal_cut_memory",
    "pad_for_cut",
    "from_toeplitz_cover",
    "write_decomposition",
    "read_decomposition",
]


@dataclass(frozen=True)
class CutParams:
    m: int
    n: int
    eta: int
    ell: int

    @property
    def c(self) -> int:
        return self.ell * self.n // self.eta

    @property
    def b(self) -> int:
        return self.ell * (self.n - self.m) // self.eta

    @property
    def rows_per_step(self) -> int:
        return self.ell * self.m // self.eta

    @property
    def m_s(self) -> int:
        return self.eta // self.ell - 1

    @property
    def T_s(self) -> int:
        return self.eta // self.ell

    @property
    def nu_s(self) -> int:
        return (self.m_s + 1) * self.c

    def report(self) -> str:
        return (f"eta={self.eta} ell={self.ell} b'={self.b} c'={self.c} "
                f"m_s'={self.m_s} T_s'={self.T_s} nu_s'={self.nu_s}")


def cut_params(m: int, n: int, ell: int = 1) -> CutParams:
    eta = gcd(m, n)
    if ell <= 0 or eta % ell:
        raise ValueError(f"ell={ell} does not divide gcd({m}, {n})={eta}")
    return CutParams(m, n, eta, ell)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Ordered parts ``H_0 .. H_k`` of equal shape with disjoint supports."""

    parts: tuple[SparseBinMatrix, ...]

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("a decomposition needs at least one part")
        shape = parts[0].shape
        if any(P.shape != shape for P in parts):
            raise ValueError("all parts must share one shape")
        total = sum(P.nnz for P in parts)
        if total and self.total().nnz != total:
            raise ValueError("parts overlap, so their integer sum is not a 0/1 matrix")
        object.__setattr__(self, "parts", parts)

    @property
    def shape(self) -> tuple[int, int]:
        return self.parts[0].shape

    def total(self) -> SparseBinMatrix:
        m, n = self.parts[0].shape
        return SparseBinMatrix.from_coords(
            m, n,
            np.concatenate([P.row_ids() for P in self.parts]),
            np.concatenate([P.indices for P in self.parts]),
        )


# ---------------------------------------------------------------------------
# polynomial route
# ---------------------------------------------------------------------------

def tanner_unwrap(Hqc: PolyMatrix) -> PolyMatrix:
    """Same exponent sets, modulus dropped."""
    if Hqc.modulus is None:
        raise ValueError("expected a matrix over F2[X]/(X^r-1)")
    return Hqc.with_modulus(None)


def tanner_wrap(v: Sequence[Iterable[int]], r: int) -> list[frozenset]:
    """Reduce a D-domain polynomial vector modulo ``D^r - 1``."""
    if r <= 0:
        raise ValueError("r must be positive")
    out = []
    for p in v:
        acc: set[int] = set()
        for e in p:
            acc ^= {int(e) % r}
        out.append(frozenset(acc))
    return out


def wrap_stream(v, c: int, r: int) -> np.ndarray:
    """Wrap a time-major bit stream (``v[t*c + k]`` = coefficient of ``D^t``
    in component ``k``) into the component-major layout of ``expand_poly``."""
    v = np.asarray(v, dtype=np.uint8).ravel()
    if len(v) % c:
        raise ValueError("stream length is not a multiple of c")
    blocks = v.reshape(-1, c)
    out = np.zeros(c * r, dtype=np.uint8)
    for t in np.flatnonzero(blocks.any(axis=1)):
        out[np.arange(c) * r + t % r] ^= blocks[t]
    return out


def reduce_memory(Hconv: PolyMatrix) -> PolyMatrix:
    """Divide every row by the largest power of ``D`` it contains."""
    if Hconv.modulus is not None:
        raise ValueError("expected a D-domain matrix")
    rows = []
    for j, row in enumerate(Hconv.entries):
        exps = [e for cell in row for e in cell]
        if not exps:
            raise ValueError(f"row {j} is empty")
        e0 = min(exps)
        rows.append([[x - e0 for x in cell] for cell in row])
    return PolyMatrix.from_exponents(rows, None)


# ---------------------------------------------------------------------------
# decomposition route
# ---------------------------------------------------------------------------

def jfz_diagonal_cut(H: SparseBinMatrix, ell: int = 1) -> Decomposition:
    """Staircase cut: right ``c'`` columns, down ``c' - b'`` rows, repeated.

    Entries on or below the staircase (column step index not larger than
    the row step index) form ``H_0``; the rest form ``H_1``.
    """
    p = cut_params(H.rows, H.cols, ell)
    rows, cols = H.row_ids(), H.indices
    lower = cols // p.c <= rows // p.rows_per_step
    H0 = SparseBinMatrix.from_coords(H.rows, H.cols, rows[lower], cols[lower])
    H1 = SparseBinMatrix.from_coords(H.rows, H.cols, rows[~lower], cols[~lower])
    return Decomposition((H0, H1))


def jfz_random_cut(H: SparseBinMatrix, seed: int) -> Decomposition:
    """Assign each nonzero to ``H_0`` or ``H_1`` by a fair coin.

    One draw per nonzero in row-major order from a Philox stream keyed by
    ``seed``, so a given seed reproduces the same cut on any platform.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    coin = rng.integers(0, 2, size=H.nnz).astype(bool)
    rows, cols = H.row_ids(), H.indices
    H0 = SparseBinMatrix.from_coords(H.rows, H.cols, rows[~coin], cols[~coin])
    H1 = SparseBinMatrix.from_coords(H.rows, H.cols, rows[coin], cols[coin])
    return Decomposition((H0, H1))


def jfz_unwrap(d: Decomposition) -> ConvCode:
    """Time-invariant code with ``H_i = parts[i]``, block sizes ``(m, n)``."""
    m, n = d.shape
    if m >= n:
        raise ValueError("need fewer rows than columns")
    return ConvCode(n, n - m, len(d.parts) - 1, 1, (tuple(d.parts),))


def diagonal_cut_code(H: SparseBinMatrix, ell: int = 1) -> ConvCode:
    """Diagonal cut followed by unwrapping, in the periodic time-varying view.

    Block sizes are ``(c' - b', c')`` and the period is ``eta / ell`` (or a
    divisor of it if the matrix has extra symmetry).
    """
    p = cut_params(H.rows, H.cols, ell)
    ti = jfz_unwrap(jfz_diagonal_cut(H, ell))
    return unblock(ti, p.T_s)


def diagonal_cut_offsets(H: SparseBinMatrix, ell: int = 1) -> np.ndarray:
    """Memory level of every nonzero of ``H`` in :func:`diagonal_cut_code`.

    Computed from the staircase positions alone, without building the code,
    so it is cheap for large matrices.  Nonzeros are in row-major order.
    """
    p = cut_params(H.rows, H.cols, ell)
    tr = H.row_ids() // p.rows_per_step
    tc = H.indices // p.c
    return np.where(tc <= tr, tr - tc, p.T_s + tr - tc)


def diagonal_cut_memory(H: SparseBinMatrix, ell: int = 1) -> int:
    """Syndrome former memory actually reached by the diagonal cut."""
    off = diagonal_cut_offsets(H, ell)
    return int(off.max()) if len(off) else 0


def pad_for_cut(H: SparseBinMatrix, positions: Sequence[int]) -> tuple[SparseBinMatrix, np.ndarray]:
    """Insert all-zero columns so that ``gcd(m, n)`` grows.

    ``positions`` are column indices in the widened matrix.  The returned
    mask is 1 exactly at the inserted (punctured) positions.
    """
    n_new = H.cols + len(positions)
    pos = sorted(int(x) for x in positions)
    if len(set(pos)) != len(pos) or (pos and (pos[0] < 0 or pos[-1] >= n_new)):
        raise ValueError("insert positions must be distinct and inside the widened matrix")
    mask = np.zeros(n_new, dtype=np.uint8)
    mask[pos] = 1
    keep = np.flatnonzero(mask == 0)
    return SparseBinMatrix.from_coords(H.rows, n_new, H.row_ids(), keep[H.indices]), mask


def from_toeplitz_cover(spec: CoverSpec) -> ConvCode:
    """Shortened semi-infinite code of a cover built with Toeplitz permutations.

    Part ``A_l`` with shift ``T_s`` lands in memory level ``s``.  For GCC1
    the bi-infinite matrix is first brought to block-time order by the
    perfect shuffle, which yields the same code as GCC2.
    """
    if not spec.parts or not spec.is_toeplitz:
        raise ValueError("expected a cover spec with Toeplitz permutations")
    m, n = spec.proto.shape
    if m >= n:
        raise ValueError("need fewer proto rows than columns")
    m_s = max(P.s for _, P in spec.parts)
    acc = [np.zeros((m, n), dtype=np.int64) for _ in range(m_s + 1)]
    for A, P in spec.parts:
        assert isinstance(P, ToeplitzShift)
        acc[P.s] += A
    if any(a.max(initial=0) > 1 for a in acc):
        warnings.warn("Toeplitz cover has parallel edges; keeping the support", ParallelEdgeWarning, stacklevel=2)
    blocks = tuple(SparseBinMatrix.from_dense(a > 0) for a in acc)
    return ConvCode(n, n - m, m_s, 1, (blocks,))


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def write_decomposition(d: Decomposition, directory) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    lines = [f"parts={len(d.parts)}", f"rows={d.shape[0]}", f"cols={d.shape[1]}"]
    for k, P in enumerate(d.parts):
        name = f"part_{k}.alist"
        write_alist(P, out / name)
        lines.append(f"part.{k}={name}")
    path = out / "decomposition.txt"
    path.write_text("\n".join(lines) + "\n")
    return path


def read_decomposition(path) -> Decomposition:
    p = Path(path)
    if p.is_dir():
        p = p / "decomposition.txt"
    kv = dict(ln.split("=", 1) for ln in p.read_text().split() if "=" in ln)
    k = int(kv["parts"])
    return Decomposition(tuple(read_alist(p.parent / kv[f"part.{i}"]) for i in range(k)))
