"""Sum-product decoding: flooding block decoder and pipelined window decoder.

Messages are log-likelihood ratios (positive favours bit 0).  Check nodes
use the exact tanh rule, every message is clipped to ``+-CLIP``, and a total
LLR of exactly zero decides bit 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .convcode import ConvCode, materialize_window_indexed
from .gf2 import SparseBinMatrix

__all__ = [
    "CLIP",
    "DecodeResult",
    "TannerGraph",
    "bp_decode_block",
    "pipeline_decode",
    "pipeline_schedule",
    "PipelineDecoder",
    "llr_from_awgn",
    "awgn_sigma2",
]

CLIP = 31.0


@dataclass(frozen=True)
class DecodeResult:
    bits: np.ndarray
    iterations: int
    converged: bool


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@numba.njit(cache=True, inline="always")
def _clip(x):
    if x > CLIP:
        return CLIP
    if x < -CLIP:
        return -CLIP
    return x


@numba.njit(cache=True)
def _check_update(row_ptr, v2c, c2v, r0, r1, fwd):
    for j in range(r0, r1):
        s = row_ptr[j]
        e = row_ptr[j + 1]
        d = e - s
        if d == 0:
            continue
        acc = 1.0
        for k in range(d):
            fwd[k] = acc
            acc *= math.tanh(0.5 * v2c[s + k])
        acc = 1.0
        for k in range(d - 1, -1, -1):
            p = fwd[k] * acc
            acc *= math.tanh(0.5 * v2c[s + k])
            if p >= 1.0:
                c2v[s + k] = CLIP
            elif p <= -1.0:
                c2v[s + k] = -CLIP
            else:
                c2v[s + k] = _clip(2.0 * math.atanh(p))


@numba.njit(cache=True)
def _var_update(col_ptr, col_edges, llr, c2v, v2c, dec, total, c0, c1):
    for i in range(c0, c1):
        t = llr[i]
        for k in range(col_ptr[i], col_ptr[i + 1]):
            t += c2v[col_edges[k]]
        total[i] = t
        dec[i] = 1 if t < 0.0 else 0
        for k in range(col_ptr[i], col_ptr[i + 1]):
            e = col_edges[k]
            v2c[e] = _clip(t - c2v[e])


@numba.njit(cache=True)
def _init_v2c(col_ptr, col_edges, llr, v2c):
    for i in range(len(col_ptr) - 1):
        x = _clip(llr[i])
        for k in range(col_ptr[i], col_ptr[i + 1]):
            v2c[col_edges[k]] = x


@numba.njit(cache=True)
def _syndrome_ok(row_ptr, edge_var, dec):
    for j in range(len(row_ptr) - 1):
        s = 0
        for k in range(row_ptr[j], row_ptr[j + 1]):
            s ^= dec[edge_var[k]]
        if s:
            return False
    return True


@numba.njit(cache=True)
def _flood(row_ptr, edge_var, col_ptr, col_edges, llr, max_iter, early_stop, maxdeg, dec):
    n_edges = len(edge_var)
    n_rows = len(row_ptr) - 1
    n_cols = len(col_ptr) - 1
    v2c = np.empty(n_edges)
    c2v = np.zeros(n_edges)
    total = np.empty(n_cols)
    fwd = np.empty(max(maxdeg, 1))
    _init_v2c(col_ptr, col_edges, llr, v2c)
    it = 0
    ok = False
    for it in range(1, max_iter + 1):
        _check_update(row_ptr, v2c, c2v, 0, n_rows, fwd)
        _var_update(col_ptr, col_edges, llr, c2v, v2c, dec, total, 0, n_cols)
        if early_stop:
            ok = _syndrome_ok(row_ptr, edge_var, dec)
            if ok:
                break
    if not early_stop:
        ok = _syndrome_ok(row_ptr, edge_var, dec)
    return it, ok


@numba.njit(cache=True)
def _pipeline(row_ptr, edge_var, col_ptr, col_edges, llr, row_block_ptr, n_blocks, c,
              n_check_blocks, m_s, n_iter, maxdeg, dec):
    n_edges = len(edge_var)
    n_cols = len(col_ptr) - 1
    v2c = np.empty(n_edges)
    c2v = np.zeros(n_edges)
    total = np.empty(n_cols)
    fwd = np.empty(max(maxdeg, 1))
    _init_v2c(col_ptr, col_edges, llr, v2c)
    last_var = n_blocks - 1
    span = m_s + 1
    n_steps = last_var + m_s + (n_iter - 1) * span + 1
    for tau in range(n_steps):
        for k in range(n_iter):
            j = tau - k * span
            if 0 <= j < n_check_blocks:
                _check_update(row_ptr, v2c, c2v, row_block_ptr[j], row_block_ptr[j + 1], fwd)
            u = j - m_s
            if 0 <= u < n_blocks:
                _var_update(col_ptr, col_edges, llr, c2v, v2c, dec, total, u * c, (u + 1) * c)


# ---------------------------------------------------------------------------
# graph container
# ---------------------------------------------------------------------------

class TannerGraph:
    """Edge arrays of a parity-check matrix, prepared once for many decodes.

    Edges are numbered in row-major order; ``col_edges`` lists them per bit
    node in increasing check order.
    """

    def __init__(self, H: SparseBinMatrix):
        self.H = H
        self.row_ptr = H.indptr.astype(np.int64)
        self.edge_var = H.indices.astype(np.int64)
        order = np.lexsort((H.row_ids(), self.edge_var))
        self.col_edges = order.astype(np.int64)
        self.col_ptr = np.concatenate([[0], np.cumsum(H.col_degrees())]).astype(np.int64)
        self.maxdeg = int(H.row_degrees().max()) if H.rows else 0

    @property
    def n(self) -> int:
        return self.H.cols

    def decode(self, llr, max_iter: int = 100, early_stop: bool = True) -> DecodeResult:
        llr = np.ascontiguousarray(llr, dtype=np.float64)
        if llr.shape != (self.n,):
            raise ValueError(f"expected {self.n} LLRs, got {llr.shape}")
        if max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        dec = np.zeros(self.n, dtype=np.uint8)
        it, ok = _flood(self.row_ptr, self.edge_var, self.col_ptr, self.col_edges, llr,
                        int(max_iter), bool(early_stop), self.maxdeg, dec)
        return DecodeResult(dec, int(it), bool(ok))


def bp_decode_block(H: SparseBinMatrix, llr, max_iter: int = 100, *, early_stop: bool = True) -> DecodeResult:
    """Flooding sum-product decoding, stopping at the first zero syndrome."""
    return TannerGraph(H).decode(llr, max_iter, early_stop)


class PipelineDecoder:
    """Sliding-window decoder with ``I`` processors for streams of ``n_blocks`` blocks.

    Processor ``k`` (0-based) works ``k * (m_s + 1)`` blocks behind the
    leading edge: at time step ``tau`` it updates check block
    ``tau - k (m_s + 1)`` and then bit block ``tau - k (m_s + 1) - m_s``,
    whose checks are then all up to date.  A bit block leaves the last
    processor after exactly ``I`` updates, ``I (m_s + 1)`` blocks after it
    entered, i.e. with a delay of ``I * nu_s`` received symbols.
    """

    def __init__(self, code: ConvCode, n_blocks: int, I: int, *, terminated: bool = True):
        if I < 1:
            raise ValueError("I must be at least 1")
        self.code = code
        self.n_blocks = n_blocks
        self.I = I
        H, row_block = materialize_window_indexed(code, 0, n_blocks, tail=terminated)
        self.graph = TannerGraph(H)
        self.n_check_blocks = n_blocks + (code.m_s if terminated else 0)
        self.row_block_ptr = np.searchsorted(row_block, np.arange(self.n_check_blocks + 1)).astype(np.int64)

    @property
    def delay_symbols(self) -> int:
        return self.I * self.code.nu_s

    def decode(self, llr) -> np.ndarray:
        g = self.graph
        llr = np.ascontiguousarray(llr, dtype=np.float64)
        if llr.shape != (g.n,):
            raise ValueError(f"expected {g.n} LLRs, got {llr.shape}")
        dec = np.zeros(g.n, dtype=np.uint8)
        _pipeline(g.row_ptr, g.edge_var, g.col_ptr, g.col_edges, llr, self.row_block_ptr,
                  self.n_blocks, self.code.c, self.n_check_blocks, self.code.m_s, self.I, g.maxdeg, dec)
        return dec


def pipeline_decode(code: ConvCode, llr, I: int, *, terminated: bool = True) -> np.ndarray:
    """Hard decisions of the pipeline decoder for a block-aligned LLR stream.

    ``terminated=True`` treats the stream as zero-tail terminated (the
    trailing checks see only known-zero symbols beyond its end).
    """
    llr = np.asarray(llr, dtype=np.float64).ravel()
    if len(llr) % code.c:
        raise ValueError("LLR stream is not block aligned")
    n_blocks = len(llr) // code.c
    if n_blocks == 0:
        return np.zeros(0, dtype=np.uint8)
    return PipelineDecoder(code, n_blocks, I, terminated=terminated).decode(llr)


def pipeline_schedule(code: ConvCode, n_blocks: int, I: int, *, terminated: bool = True):
    """Yield ``(tau, processor, check_block, bit_block)`` in execution order.

    Entries of ``None`` mean the processor is idle for that half of the step.
    """
    span = code.m_s + 1
    n_check = n_blocks + (code.m_s if terminated else 0)
    n_steps = n_blocks - 1 + code.m_s + (I - 1) * span + 1
    for tau in range(n_steps):
        for k in range(I):
            j = tau - k * span
            u = j - code.m_s
            jj = j if 0 <= j < n_check else None
            uu = u if 0 <= u < n_blocks else None
            if jj is not None or uu is not None:
                yield tau, k, jj, uu


# ---------------------------------------------------------------------------
# channel
# ---------------------------------------------------------------------------

def awgn_sigma2(ebn0_db: float, R: float) -> float:
    if R <= 0:
        raise ValueError("rate must be positive")
    return 1.0 / (2.0 * R * 10.0 ** (ebn0_db / 10.0))


def llr_from_awgn(y, ebn0_db: float, R: float) -> np.ndarray:
    """Channel LLRs ``2 y / sigma^2`` for BPSK (0 -> +1, 1 -> -1)."""
    return 2.0 * np.asarray(y, dtype=np.float64) / awgn_sigma2(ebn0_db, float(R))
