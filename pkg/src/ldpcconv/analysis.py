"""Structural analysis of Tanner graphs: girth, short-cycle spectra and
pseudo-codewords."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numba
import numpy as np
import scipy.sparse as sp

from .convcode import ConvCode, materialize_window, reblock
from .gf2 import SparseBinMatrix

__all__ = [
    "INF",
    "CycleSpectrum",
    "PseudoCodeword",
    "PseudoWeights",
    "girth",
    "cycle_spectrum",
    "conv_cycle_spectrum",
    "count_cycles",
    "project_pseudocodeword",
    "pseudoweights",
    "fundamental_polytope_contains",
    "active_part_has_cycle",
    "format_spectrum_csv",
    "format_pseudoweights",
]

INF = math.inf
POLYTOPE_MAX_ROW_WEIGHT = 12


# ---------------------------------------------------------------------------
# girth
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _girth_bfs(indptr, adj, n_nodes):
    best = 1 << 30
    dist = np.full(n_nodes, -1, dtype=np.int64)
    parent = np.full(n_nodes, -1, dtype=np.int64)
    queue = np.empty(n_nodes, dtype=np.int64)
    for root in range(n_nodes):
        if indptr[root + 1] == indptr[root]:
            continue
        dist[:] = -1
        dist[root] = 0
        parent[root] = -1
        head = 0
        tail = 1
        queue[0] = root
        while head < tail:
            u = queue[head]
            head += 1
            if 2 * dist[u] + 1 >= best:
                break
            for k in range(indptr[u], indptr[u + 1]):
                w = adj[k]
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue[tail] = w
                    tail += 1
                elif w != parent[u]:
                    length = dist[u] + dist[w] + 1
                    if length < best:
                        best = length
    return best


def _bipartite_adjacency(H: SparseBinMatrix):
    # nodes 0..n-1 are bit nodes, n..n+m-1 check nodes
    m, n = H.shape
    r, c = H.row_ids(), H.indices
    u = np.concatenate([c, r + n])
    v = np.concatenate([r + n, c])
    A = sp.csr_matrix((np.ones(len(u), dtype=np.int8), (u, v)), shape=(n + m, n + m))
    A.sort_indices()
    return A.indptr.astype(np.int64), A.indices.astype(np.int64), n + m


def girth(H: SparseBinMatrix) -> float:
    """Length of the shortest cycle of the Tanner graph, ``INF`` for a forest."""
    if H.nnz == 0:
        return INF
    indptr, adj, nn = _bipartite_adjacency(H)
    g = _girth_bfs(indptr, adj, nn)
    return INF if g >= (1 << 30) else int(g)


# ---------------------------------------------------------------------------
# cycle counting with the non-backtracking edge matrix
# ---------------------------------------------------------------------------

def _nonbacktracking(H: SparseBinMatrix) -> sp.csr_matrix:
    """Directed-edge transition matrix without immediate reversals.

    Edge ``e`` (bit -> check) has id ``e``, its reverse (check -> bit) id
    ``E + e``.
    """
    E = H.nnz
    chk, var = H.row_ids(), H.indices
    by_chk = sp.csr_matrix((np.ones(E, dtype=np.int64), (chk, np.arange(E))), shape=(H.rows, E))
    by_var = sp.csr_matrix((np.ones(E, dtype=np.int64), (var, np.arange(E))), shape=(H.cols, E))
    # bit->check e continues with check->bit f at the same check, f != e
    same_chk = (by_chk.T @ by_chk).tocoo()
    keep = same_chk.row != same_chk.col
    r1, c1 = same_chk.row[keep], same_chk.col[keep] + E
    # check->bit e continues with bit->check f at the same bit, f != e
    same_var = (by_var.T @ by_var).tocoo()
    keep = same_var.row != same_var.col
    r2, c2 = same_var.row[keep] + E, same_var.col[keep]
    rows = np.concatenate([r1, r2])
    cols = np.concatenate([c1, c2])
    return sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(2 * E, 2 * E))


def count_cycles(H: SparseBinMatrix, lengths: Sequence[int]) -> dict[int, int]:
    """Exact number of cycles of each requested length.

    Uses ``tr(B^k) / (2k)`` with ``B`` the non-backtracking matrix, which
    is exact for ``k < 2 * girth``.  The caller is responsible for that bound.
    """
    lengths = sorted(set(int(k) for k in lengths))
    out = {k: 0 for k in lengths}
    if H.nnz == 0 or not lengths:
        return out
    B = _nonbacktracking(H)
    half = max((k + 1) // 2 for k in lengths)
    powers = {1: B}
    P = B
    for a in range(2, half + 1):
        P = P @ B
        powers[a] = P
    for k in lengths:
        if k % 2:
            out[k] = 0
            continue
        Pa = powers[k // 2]
        tr = int(Pa.multiply(Pa.T).sum())
        out[k] = tr // (2 * k)
    return out


@dataclass(frozen=True)
class CycleSpectrum:
    """Cycle counts by length and their per-bit-node averages."""

    counts: dict
    basis: int
    girth: float

    @property
    def normalized(self) -> dict:
        return {k: v / self.basis for k, v in self.counts.items()}

    def rounded(self, ndigits: int = 3) -> dict:
        return {k: round(v, ndigits) for k, v in self.normalized.items()}


def _check_len(max_len: int, g: float) -> None:
    if max_len >= 2 * g:
        raise ValueError(
            f"max_len={max_len} is not below twice the girth ({g}); the trace method would miscount"
        )


def cycle_spectrum(H: SparseBinMatrix, max_len: int) -> CycleSpectrum:
    """Counts of cycles of every even length ``4 .. max_len``, averaged per bit node."""
    g = girth(H)
    _check_len(max_len, g)
    counts = count_cycles(H, range(4, max_len + 1, 2))
    return CycleSpectrum(counts, H.cols, g)


def conv_cycle_spectrum(code: ConvCode, max_len: int) -> CycleSpectrum:
    """Cycles per period of the bi-infinite code, averaged per bit node.

    The code is viewed time-invariantly (one period per block).  A cycle of
    length ``L`` spans at most ``(L // 4) * m`` blocks for memory ``m``, so
    with ``N`` at least that span the difference between the counts on
    terminated windows of ``N + 1`` and ``N`` blocks is exactly the number
    of cycles whose last bit block is block ``N``, i.e. one period's worth.
    """
    ti = reblock(code, code.T_s).trimmed() if code.T_s > 1 else code.trimmed()
    span = max(1, (max_len // 4) * ti.m_s)
    lo = materialize_window(ti, 0, span)
    hi = materialize_window(ti, 0, span + 1)
    g = girth(hi)
    _check_len(max_len, g)
    lengths = range(4, max_len + 1, 2)
    a = count_cycles(lo, lengths)
    b = count_cycles(hi, lengths)
    counts = {k: b[k] - a[k] for k in lengths}
    return CycleSpectrum(counts, ti.c, g)


def format_spectrum_csv(spec: CycleSpectrum) -> str:
    lines = ["length,count,normalized_avg"]
    for k in sorted(spec.counts):
        lines.append(f"{k},{spec.counts[k]},{spec.counts[k] / spec.basis:.6f}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# pseudo-codewords
# ---------------------------------------------------------------------------

def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x)).limit_denominator(10**9)
    return Fraction(int(x))


@dataclass(frozen=True)
class PseudoCodeword:
    omega: tuple

    def __post_init__(self):
        om = tuple(_frac(x) for x in self.omega)
        if any(x < 0 for x in om):
            raise ValueError("pseudo-codeword entries must be nonnegative")
        object.__setattr__(self, "omega", om)

    def __len__(self) -> int:
        return len(self.omega)

    @property
    def support(self) -> list[int]:
        return [i for i, x in enumerate(self.omega) if x != 0]

    def as_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.omega])


@dataclass(frozen=True)
class PseudoWeights:
    awgnc: Fraction
    bsc: Fraction
    bec: int


def project_pseudocodeword(omega_tilde, M: int, fiber) -> PseudoCodeword:
    """Average a cover vector over the fibres of the projection.

    ``fiber[k]`` is the base index of cover position ``k``; every base index
    must have exactly ``M`` preimages.
    """
    om = omega_tilde.omega if isinstance(omega_tilde, PseudoCodeword) else tuple(_frac(x) for x in omega_tilde)
    fiber = np.asarray(fiber, dtype=np.int64)
    if len(fiber) != len(om):
        raise ValueError("fibre map length differs from the vector length")
    if M <= 0 or len(om) % M:
        raise ValueError("cover length is not a multiple of M")
    n = len(om) // M
    if len(fiber) and (fiber.min() < 0 or fiber.max() >= n):
        raise ValueError("fibre map points outside the base")
    if np.any(np.bincount(fiber, minlength=n) != M):
        raise ValueError("fibres must all have size M")
    acc = [Fraction(0)] * n
    for k, x in zip(fiber, om):
        acc[k] += x
    return PseudoCodeword(tuple(a / M for a in acc))


def pseudoweights(omega) -> PseudoWeights:
    """AWGNC, BSC and BEC pseudo-weights (exact rational arithmetic)."""
    om = omega.omega if isinstance(omega, PseudoCodeword) else tuple(_frac(x) for x in omega)
    total = sum(om, Fraction(0))
    if total == 0:
        raise ValueError("pseudo-weights are undefined for the zero vector")
    sq = sum((x * x for x in om), Fraction(0))
    awgnc = total * total / sq
    # BSC: twice the (fractional) number of largest entries holding half the mass
    half = total / 2
    acc = Fraction(0)
    bsc = Fraction(0)
    for e, x in enumerate(sorted(om, reverse=True)):
        if acc + x >= half:
            bsc = 2 * (e + (half - acc) / x)
            break
        acc += x
    bec = sum(1 for x in om if x != 0)
    return PseudoWeights(awgnc, bsc, bec)


def fundamental_polytope_contains(H: SparseBinMatrix, omega) -> bool:
    """Membership test by enumerating the odd-subset inequalities of every check."""
    om = omega.omega if isinstance(omega, PseudoCodeword) else tuple(_frac(x) for x in omega)
    if len(om) != H.cols:
        raise ValueError("vector length differs from the number of columns")
    if H.rows and H.row_degrees().max() > POLYTOPE_MAX_ROW_WEIGHT:
        raise ValueError(f"row weight above {POLYTOPE_MAX_ROW_WEIGHT}; subset enumeration refused")
    if any(x < 0 or x > 1 for x in om):
        return False
    for j in range(H.rows):
        nb = [int(i) for i in H.row(j)]
        vals = [om[i] for i in nb]
        tot = sum(vals, Fraction(0))
        for size in range(1, len(nb) + 1, 2):
            for S in itertools.combinations(range(len(nb)), size):
                inside = sum((vals[s] for s in S), Fraction(0))
                if inside - (tot - inside) > size - 1:
                    return False
    return True


def active_part_has_cycle(H: SparseBinMatrix, omega) -> bool:
    """Does the active part contain a cycle or a bit node of degree one?

    The active part is the subgraph formed by the support bits, every edge
    leaving them and the checks at the other end.  The degree refers to the
    bit node's degree in the Tanner graph of ``H``.
    """
    om = omega.omega if isinstance(omega, PseudoCodeword) else tuple(omega)
    if len(om) != H.cols:
        raise ValueError("vector length differs from the number of columns")
    supp = np.array([i for i, x in enumerate(om) if x != 0], dtype=np.int64)
    if len(supp) == 0:
        return False
    sub = H.select_columns(supp)
    if np.any(sub.col_degrees() == 1):
        return True
    sub = sub.drop_zero_rows()
    n_nodes = sub.rows + sub.cols
    n_comp, _ = sp.csgraph.connected_components(_undirected(sub), directed=False)
    return sub.nnz > n_nodes - n_comp


def _undirected(H: SparseBinMatrix) -> sp.csr_matrix:
    m, n = H.shape
    r, c = H.row_ids(), H.indices
    u = np.concatenate([c, r + n])
    v = np.concatenate([r + n, c])
    return sp.csr_matrix((np.ones(len(u)), (u, v)), shape=(n + m, n + m))


def format_pseudoweights(w: PseudoWeights, in_polytope: bool | None = None, has_cycle: bool | None = None) -> str:
    lines = [
        f"awgnc={float(w.awgnc):.6g}",
        f"awgnc_exact={w.awgnc}",
        f"bsc={float(w.bsc):.6g}",
        f"bsc_exact={w.bsc}",
        f"bec={w.bec}",
    ]
    if in_polytope is not None:
        lines.append(f"in_fundamental_polytope={str(in_polytope).lower()}")
    if has_cycle is not None:
        lines.append(f"active_part_has_cycle_or_leaf={str(has_cycle).lower()}")
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
