"""Periodically time-varying convolutional codes in syndrome-former form.

A code is described by sub-blocks ``H_i(t)`` of size ``(c-b) x c`` for
``0 <= i <= m_s`` and ``0 <= t < T_s``.  The semi-infinite parity-check
matrix has block row ``t`` holding ``H_i(t mod T_s)`` at block column
``t - i``; block columns with negative index are shortened away.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .gf2 import PolyMatrix, SparseBinMatrix, gf2_rref, read_alist, write_alist

__all__ = [
    "ConvCode",
    "ConvParams",
    "NotSystematicError",
    "materialize_window",
    "materialize_window_indexed",
    "terminated_matrix",
    "from_tanner_poly",
    "reblock",
    "unblock",
    "encode",
    "is_valid_stream",
    "params_report",
    "write_conv_code",
    "read_conv_code",
]


class NotSystematicError(ValueError):
    """Some ``H_0(t)`` does not have full row rank, so no shift-register encoder exists."""


class ConvParams(NamedTuple):
    R: Fraction
    m_s: int
    nu_s: int
    T_s: int


@dataclass(frozen=True, eq=False)
class ConvCode:
    c: int
    b: int
    m_s: int
    T_s: int
    blocks: tuple[tuple[SparseBinMatrix, ...], ...]  # blocks[t][i] = H_i(t)

    def __post_init__(self):
        if self.c <= 0 or not 0 <= self.b < self.c:
            raise ValueError(f"need 0 <= b < c, got b={self.b}, c={self.c}")
        if self.m_s < 0 or self.T_s <= 0:
            raise ValueError("m_s must be >= 0 and T_s > 0")
        blocks = tuple(tuple(row) for row in self.blocks)
        if len(blocks) != self.T_s or any(len(row) != self.m_s + 1 for row in blocks):
            raise ValueError("blocks must be indexed [t][i] with T_s x (m_s+1) entries")
        shape = (self.c - self.b, self.c)
        for row in blocks:
            for H in row:
                if H.shape != shape:
                    raise ValueError(f"sub-block shape {H.shape} differs from {shape}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def rows_per_block(self) -> int:
        return self.c - self.b

    @property
    def nu_s(self) -> int:
        return (self.m_s + 1) * self.c

    @property
    def rate(self) -> Fraction:
        return Fraction(self.b, self.c)

    @property
    def time_invariant(self) -> bool:
        return self.T_s == 1

    def H(self, i: int, t: int) -> SparseBinMatrix:
        return self.blocks[t % self.T_s][i]

    def period_profile(self) -> tuple[np.ndarray, np.ndarray]:
        """Column and row degrees of one period of the bi-infinite matrix.

        Column ``k`` of block ``t`` collects ``H_i(t+i)`` for all ``i``; row
        ``j`` of check block ``t`` collects ``H_i(t)`` for all ``i``.
        """
        cols = np.zeros(self.T_s * self.c, dtype=np.int64)
        rows = np.zeros(self.T_s * self.rows_per_block, dtype=np.int64)
        for t in range(self.T_s):
            for i in range(self.m_s + 1):
                rows[t * self.rows_per_block:(t + 1) * self.rows_per_block] += self.H(i, t).row_degrees()
                cols[t * self.c:(t + 1) * self.c] += self.H(i, t + i).col_degrees()
        return cols, rows

    def trimmed(self) -> "ConvCode":
        """Drop trailing all-zero memory levels and collapse to the minimal period."""
        m_s = self.m_s
        while m_s > 0 and all(self.blocks[t][m_s].nnz == 0 for t in range(self.T_s)):
            m_s -= 1
        blocks = tuple(row[: m_s + 1] for row in self.blocks)
        T = _minimal_period(blocks)
        return ConvCode(self.c, self.b, m_s, T, blocks[:T])


def _minimal_period(blocks) -> int:
    T = len(blocks)
    for d in range(1, T + 1):
        if T % d == 0 and all(blocks[t] == blocks[t % d] for t in range(T)):
            return d
    return T


def _window_coords(code: ConvCode, t_start: int, n_blocks: int, n_check_blocks: int):
    rb, c = code.rows_per_block, code.c
    cache = {}
    r_all, c_all = [], []
    for tc in range(t_start, t_start + n_check_blocks):
        for i in range(code.m_s + 1):
            tv = tc - i
            if tv < t_start or tv >= t_start + n_blocks:
                continue
            H = code.H(i, tc)
            if H.nnz == 0:
                continue
            key = (tc % code.T_s, i)
            if key not in cache:
                cache[key] = (H.row_ids(), H.indices)
            hr, hc = cache[key]
            r_all.append(hr + (tc - t_start) * rb)
            c_all.append(hc + (tv - t_start) * c)
    if r_all:
        return np.concatenate(r_all), np.concatenate(c_all)
    return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)


def materialize_window(code: ConvCode, t_start: int, n_blocks: int, *, tail: bool = True) -> SparseBinMatrix:
    """Scalar sub-matrix over block columns ``[t_start, t_start + n_blocks)``.

    Rows are every check touching these columns, in time order; with
    ``tail=False`` the trailing checks that would reach beyond the window
    are left out.  All-zero rows are dropped.  For ``t_start=0`` and
    ``tail=True`` this is the zero-tail terminated code of length
    ``n_blocks``.
    """
    return materialize_window_indexed(code, t_start, n_blocks, tail=tail)[0]


def materialize_window_indexed(code: ConvCode, t_start: int, n_blocks: int, *, tail: bool = True):
    """Like :func:`materialize_window`, also returning the check block
    (relative to ``t_start``) of every kept row."""
    if n_blocks <= 0:
        raise ValueError("window needs at least one block")
    if t_start < 0:
        raise ValueError("t_start must be nonnegative")
    n_check = n_blocks + (code.m_s if tail else 0)
    rr, cc = _window_coords(code, t_start, n_blocks, n_check)
    M = SparseBinMatrix.from_coords(n_check * code.rows_per_block, n_blocks * code.c, rr, cc)
    keep = np.flatnonzero(M.row_degrees() > 0)
    return M.select_rows(keep), keep // code.rows_per_block


def terminated_matrix(code: ConvCode, n_blocks: int) -> SparseBinMatrix:
    """Parity-check matrix of the code terminated after ``n_blocks`` blocks."""
    return materialize_window(code, 0, n_blocks, tail=True)


def from_tanner_poly(Hconv: PolyMatrix) -> ConvCode:
    """Time-invariant code whose ``H_i`` collects the coefficients of ``D^i``."""
    if Hconv.modulus is not None:
        raise ValueError("expected a D-domain matrix (no modulus)")
    m, c = Hconv.shape
    if m >= c:
        raise ValueError("need fewer rows than columns for a positive rate")
    m_s = max(Hconv.max_exponent(), 0)
    coords = [([], []) for _ in range(m_s + 1)]
    for j, row in enumerate(Hconv.entries):
        for k, cell in enumerate(row):
            for e in cell:
                coords[e][0].append(j)
                coords[e][1].append(k)
    blocks = tuple(SparseBinMatrix.from_coords(m, c, r, k) for r, k in coords)
    return ConvCode(c, c - m, m_s, 1, (blocks,))


def reblock(code: ConvCode, ell: int) -> ConvCode:
    """Group ``ell`` consecutive time steps into one (``T_s' = T_s / ell``)."""
    if ell <= 0 or code.T_s % ell:
        raise ValueError(f"ell={ell} does not divide T_s={code.T_s}")
    if ell == 1:
        return code
    rb, c = code.rows_per_block, code.c
    m_new = -(-code.m_s // ell)
    T_new = code.T_s // ell
    blocks = []
    for tau in range(T_new):
        row = []
        for i2 in range(m_new + 1):
            rr, cc = [], []
            for p in range(ell):
                for q in range(ell):
                    i = i2 * ell + p - q
                    if 0 <= i <= code.m_s:
                        H = code.H(i, tau * ell + p)
                        rr.append(H.row_ids() + p * rb)
                        cc.append(H.indices + q * c)
            row.append(SparseBinMatrix.from_coords(
                ell * rb, ell * c,
                np.concatenate(rr) if rr else [], np.concatenate(cc) if cc else []))
        blocks.append(tuple(row))
    return ConvCode(ell * c, ell * code.b, m_new, T_new, tuple(blocks))


def unblock(code: ConvCode, p: int) -> ConvCode:
    """Split every time step into ``p`` finer ones (inverse of :func:`reblock`).

    Requires ``p`` to divide both ``c`` and ``c - b`` and the upper
    block-triangle of each ``H_0(t)`` (in ``p x p`` sub-blocks) to be zero,
    otherwise a check would depend on a later symbol.  Memory and period of
    the result are the minimal ones.
    """
    if p <= 0 or code.c % p or code.rows_per_block % p:
        raise ValueError(f"p={p} must divide c={code.c} and c-b={code.rows_per_block}")
    if p == 1:
        return code.trimmed()
    rb, c = code.rows_per_block // p, code.c // p
    T_new = code.T_s * p
    fine: dict[tuple[int, int], tuple[list, list]] = {}
    max_i = 0
    for t in range(code.T_s):
        for I in range(code.m_s + 1):
            H = code.H(I, t)
            if H.nnz == 0:
                continue
            rows, cols = H.row_ids(), H.indices
            pr, qc = rows // rb, cols // c
            off = I * p + pr - qc
            if np.any(off < 0):
                raise ValueError("cannot refine: a check would involve a future symbol")
            tf = t * p + pr
            for o, tt, r_, c_ in zip(off, tf, rows % rb, cols % c):
                slot = fine.setdefault((int(tt), int(o)), ([], []))
                slot[0].append(r_)
                slot[1].append(c_)
                max_i = max(max_i, int(o))
    blocks = []
    for t in range(T_new):
        row = []
        for i in range(max_i + 1):
            rr, cc = fine.get((t, i), ([], []))
            row.append(SparseBinMatrix.from_coords(rb, c, rr, cc))
        blocks.append(tuple(row))
    b_new = c - rb
    return ConvCode(c, b_new, max_i, T_new, tuple(blocks)).trimmed()


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------

def _gf2_inverse(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    red, piv = gf2_rref(np.hstack([A, np.eye(n, dtype=np.uint8)]))
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise NotSystematicError("square sub-block is singular")
    return red[:n, n:]


def _encoder_tables(code: ConvCode):
    rb = code.rows_per_block
    tables = []
    for t in range(code.T_s):
        H0 = code.H(0, t).to_dense()
        # Pivot search on reversed columns so parity lands on trailing positions when possible.
        _, piv_rev = gf2_rref(H0[:, ::-1])
        if len(piv_rev) < rb:
            raise NotSystematicError(f"H_0({t}) has rank {len(piv_rev)} < {rb}")
        parity = np.array(sorted(code.c - 1 - k for k in piv_rev), dtype=np.int64)
        info = np.setdiff1d(np.arange(code.c), parity)
        inv = _gf2_inverse(H0[:, parity])
        tables.append((info, parity, inv))
    return tables


def encode(code: ConvCode, info, *, terminate: bool = False) -> np.ndarray:
    """Systematic shift-register encoding from the zero state.

    Each block of ``c`` output bits places ``b`` info bits at the non-pivot
    positions of ``H_0(t)`` and solves for the remaining ``c - b`` parity
    bits.  Pivots are chosen from the right, so codes whose trailing square
    sub-block is invertible get the usual info-then-parity layout.
    ``terminate=True`` appends ``m_s`` all-zero info blocks.
    """
    info = np.asarray(info, dtype=np.uint8).ravel() & 1
    if len(info) % code.b if code.b else len(info):
        raise ValueError(f"info length {len(info)} is not a multiple of b={code.b}")
    tables = _encoder_tables(code)
    n_blocks = len(info) // code.b if code.b else 0
    if terminate:
        info = np.concatenate([info, np.zeros(code.m_s * code.b, dtype=np.uint8)])
        n_blocks += code.m_s
    dense = {}
    out = np.zeros((n_blocks, code.c), dtype=np.uint8)
    for t in range(n_blocks):
        info_pos, parity, inv = tables[t % code.T_s]
        v = out[t]
        v[info_pos] = info[t * code.b:(t + 1) * code.b]
        s = np.zeros(code.rows_per_block, dtype=np.uint8)
        for i in range(min(code.m_s, t) + 1):
            key = (t % code.T_s, i)
            if key not in dense:
                dense[key] = code.H(i, t).to_dense()
            s ^= (dense[key] @ out[t - i]).astype(np.uint8) & 1
        v[parity] = (inv @ s) & 1
    return out.ravel()


def is_valid_stream(code: ConvCode, v) -> bool:
    """True iff every check block ``0 .. N-1`` of an ``N``-block stream is satisfied."""
    v = np.asarray(v, dtype=np.uint8).ravel()
    if len(v) % code.c:
        raise ValueError(f"stream length {len(v)} is not a multiple of c={code.c}")
    n = len(v) // code.c
    if n == 0:
        return True
    M = materialize_window(code, 0, n, tail=False)
    return not np.any(M.syndrome(v))


def params_report(code: ConvCode) -> ConvParams:
    return ConvParams(code.rate, code.m_s, code.nu_s, code.T_s)


# ---------------------------------------------------------------------------
# manifest I/O
# ---------------------------------------------------------------------------

def write_conv_code(code: ConvCode, directory) -> Path:
    """Write ``manifest.txt`` plus one alist per sub-block ``H_i(t)``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    lines = [f"c={code.c}", f"b={code.b}", f"m_s={code.m_s}", f"T_s={code.T_s}",
             f"nu_s={code.nu_s}", f"rate={code.rate}"]
    for t in range(code.T_s):
        for i in range(code.m_s + 1):
            name = f"H_{i}_t{t}.alist"
            write_alist(code.H(i, t), d / name)
            lines.append(f"block.{t}.{i}={name}")
    path = d / "manifest.txt"
    path.write_text("\n".join(lines) + "\n")
    return path


def _read_kv(path: Path) -> dict[str, str]:
    out = {}
    for ln in path.read_text().splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise ValueError(f"malformed manifest line: {ln!r}")
        k, v = ln.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def read_conv_code(path) -> ConvCode:
    """Read a code from a manifest file or the directory holding ``manifest.txt``."""
    p = Path(path)
    if p.is_dir():
        p = p / "manifest.txt"
    kv = _read_kv(p)
    try:
        c, b, m_s, T_s = (int(kv[k]) for k in ("c", "b", "m_s", "T_s"))
    except KeyError as exc:
        raise ValueError(f"manifest lacks {exc}") from None
    blocks = []
    for t in range(T_s):
        row = []
        for i in range(m_s + 1):
            name = kv.get(f"block.{t}.{i}")
            if name is None:
                raise ValueError(f"manifest lacks block.{t}.{i}")
            row.append(read_alist(p.parent / name))
        blocks.append(tuple(row))
    return ConvCode(c, b, m_s, T_s, tuple(blocks))


def stream_blocks(v: Sequence[int], c: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.uint8).ravel()
    if len(v) % c:
        raise ValueError("stream length is not a multiple of c")
    return v.reshape(-1, c)
