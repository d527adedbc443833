"""Graph covers of a proto-graph: the two Kronecker-sum constructions.

``gcc1`` builds ``sum_l A_l (x) P_l`` (proto-block outer, permutation inner),
``gcc2`` builds ``sum_l P_l (x) A_l``.  Both give ``r``-fold covers of the
proto-graph; they differ only by a perfect-shuffle reordering of rows and
columns (see :func:`shuffle_witness`).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

from .gf2 import ParallelEdgeWarning, PolyMatrix, SparseBinMatrix

__all__ = [
    "CirculantShift",
    "ToeplitzShift",
    "Explicit",
    "Identity",
    "PermSpec",
    "CoverSpec",
    "Cover",
    "kron_perm",
    "gcc1",
    "gcc2",
    "build_cover",
    "validate_cover",
    "per_entry_decomposition",
    "cover_spec_from_poly",
    "shuffle_witness",
    "format_parts",
    "parse_parts",
    "read_parts",
    "write_parts",
]


@dataclass(frozen=True)
class CirculantShift:
    """``I_s``: ``[I_s][j, i] = 1`` iff ``j == (i + s) % r``."""

    s: int
    r: int

    def __post_init__(self):
        if self.r <= 0 or not 0 <= self.s < self.r:
            raise ValueError(f"circulant shift needs 0 <= s < r, got s={self.s}, r={self.r}")

    @property
    def size(self) -> int:
        return self.r

    def image(self) -> np.ndarray:
        return (np.arange(self.r) + self.s) % self.r


@dataclass(frozen=True)
class ToeplitzShift:
    """Bi-infinite ``T_s`` with ones where ``j == i + s``.  Never materialized here."""

    s: int

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("Toeplitz shift must be nonnegative")

    @property
    def size(self) -> None:
        return None

    def image(self) -> np.ndarray:
        raise TypeError("a Toeplitz permutation is bi-infinite; use the unwrap module")


@dataclass(frozen=True, eq=False)
class Explicit:
    """Permutation matrix with ``[P][perm[i], i] = 1``."""

    perm: tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(x) for x in self.perm)
        if sorted(p) != list(range(len(p))) or not p:
            raise ValueError("explicit permutation must be a bijection on 0..r-1")
        object.__setattr__(self, "perm", p)

    @property
    def size(self) -> int:
        return len(self.perm)

    def image(self) -> np.ndarray:
        return np.asarray(self.perm, dtype=np.int64)

    def __eq__(self, other):
        return isinstance(other, Explicit) and self.perm == other.perm

    def __hash__(self):
        return hash(self.perm)


@dataclass(frozen=True)
class Identity:
    r: int

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("identity size must be positive")

    @property
    def size(self) -> int:
        return self.r

    def image(self) -> np.ndarray:
        return np.arange(self.r)


PermSpec = Union[CirculantShift, ToeplitzShift, Explicit, Identity]


def _perm_matrix(P: PermSpec) -> sp.csr_matrix:
    img = P.image()
    r = len(img)
    return sp.csr_matrix((np.ones(r, dtype=np.int64), (img, np.arange(r))), shape=(r, r))


def _int_matrix(A) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A))
    if A.ndim != 2:
        raise ValueError("proto-block must be a 2-D integer matrix")
    if not np.issubdtype(A.dtype, np.integer):
        if np.any(A != np.round(A)):
            raise ValueError("proto-block entries must be integers")
        A = A.astype(np.int64)
    if np.any(A < 0):
        raise ValueError("proto-block entries must be nonnegative")
    return A.astype(np.int64)


def kron_perm(A_ell, P: PermSpec) -> sp.csr_matrix:
    """``A_ell (x) P`` as an integer sparse matrix; multiplicities are kept."""
    if isinstance(P, ToeplitzShift):
        raise TypeError("Toeplitz permutations are bi-infinite; hand the CoverSpec to the unwrap module")
    A = sp.csr_matrix(_int_matrix(A_ell))
    return sp.kron(A, _perm_matrix(P), format="csr").astype(np.int64)


@dataclass(frozen=True, eq=False)
class CoverSpec:
    """Proto-matrix, its decomposition into parts and their permutations."""

    proto: np.ndarray
    parts: tuple[tuple[np.ndarray, PermSpec], ...]
    kind: str = "gcc1"

    def __post_init__(self):
        proto = _int_matrix(self.proto)
        parts = tuple((_int_matrix(A), P) for A, P in self.parts)
        kind = self.kind.lower()
        if kind not in ("gcc1", "gcc2"):
            raise ValueError(f"unknown cover kind {self.kind!r}")
        total = np.zeros_like(proto)
        for A, _ in parts:
            if A.shape != proto.shape:
                raise ValueError("every part must have the proto-matrix shape")
            total = total + A
        if not np.array_equal(total, proto):
            raise ValueError("parts do not sum to the proto-matrix over the integers")
        sizes = {P.size for _, P in parts}
        if None in sizes and len(sizes) > 1:
            raise ValueError("Toeplitz and finite permutations cannot be mixed")
        if len(sizes - {None}) > 1:
            raise ValueError(f"finite permutations disagree in size: {sorted(sizes - {None})}")
        proto.setflags(write=False)
        object.__setattr__(self, "proto", proto)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "kind", kind)

    @property
    def r(self) -> int | None:
        sizes = {P.size for _, P in self.parts}
        return next(iter(sizes)) if sizes else None

    @property
    def is_toeplitz(self) -> bool:
        return any(isinstance(P, ToeplitzShift) for _, P in self.parts)

    def with_kind(self, kind: str) -> "CoverSpec":
        return CoverSpec(self.proto, self.parts, kind)


@dataclass(frozen=True, eq=False)
class Cover:
    """A constructed finite cover with its canonical projection onto the proto-graph."""

    counts: sp.csr_matrix
    matrix: SparseBinMatrix
    var_proj: np.ndarray
    chk_proj: np.ndarray
    degree: int
    kind: str

    @property
    def has_parallel_edges(self) -> bool:
        return bool(self.counts.nnz) and int(self.counts.data.max()) > 1


def _sum_counts(spec: CoverSpec, kind: str) -> sp.csr_matrix:
    if spec.is_toeplitz:
        raise TypeError("cannot materialize a bi-infinite cover; use unwrap.from_toeplitz_cover")
    r = spec.r
    if r is None:
        raise ValueError("cover needs at least one part to fix the degree r")
    m, n = spec.proto.shape
    shape = (m * r, n * r)
    acc = sp.csr_matrix(shape, dtype=np.int64)
    for A, P in spec.parts:
        Am = sp.csr_matrix(A)
        Pm = _perm_matrix(P)
        acc = acc + (sp.kron(Am, Pm) if kind == "gcc1" else sp.kron(Pm, Am))
    acc = sp.csr_matrix(acc, dtype=np.int64)
    acc.eliminate_zeros()
    acc.sort_indices()
    return acc


def _to_binary(counts: sp.csr_matrix, cancel: bool) -> SparseBinMatrix:
    coo = counts.tocoo()
    keep = coo.data % 2 == 1 if cancel else coo.data > 0
    return SparseBinMatrix.from_coords(counts.shape[0], counts.shape[1], coo.row[keep], coo.col[keep])


def build_cover(spec: CoverSpec, *, cancel: bool = False) -> Cover:
    """Construct the cover described by ``spec`` (kind taken from the spec).

    ``cancel=False`` keeps the support of the integer sum and warns about
    parallel edges; ``cancel=True`` reduces the sum modulo 2.
    """
    counts = _sum_counts(spec, spec.kind)
    r = spec.r
    m, n = spec.proto.shape
    if counts.nnz and counts.data.max() > 1:
        warnings.warn(
            f"cover has parallel edges (max multiplicity {int(counts.data.max())})",
            ParallelEdgeWarning,
            stacklevel=3,
        )
    if spec.kind == "gcc1":
        var_proj = np.arange(n * r) // r
        chk_proj = np.arange(m * r) // r
    else:
        var_proj = np.arange(n * r) % n
        chk_proj = np.arange(m * r) % m
    return Cover(counts, _to_binary(counts, cancel), var_proj, chk_proj, r, spec.kind)


def gcc1(spec: CoverSpec, *, cancel: bool = False) -> SparseBinMatrix:
    """``B = sum_l A_l (x) P_l``."""
    if spec.kind != "gcc1":
        raise ValueError("spec kind is not gcc1")
    return build_cover(spec, cancel=cancel).matrix


def gcc2(spec: CoverSpec, *, cancel: bool = False) -> SparseBinMatrix:
    """``B_bar = sum_l P_l (x) A_l``."""
    if spec.kind != "gcc2":
        raise ValueError("spec kind is not gcc2")
    return build_cover(spec, cancel=cancel).matrix


def per_entry_decomposition(A) -> list[np.ndarray]:
    """One single-entry part per nonzero of ``A``, in row-major order."""
    A = _int_matrix(A)
    parts = []
    for j, i in zip(*np.nonzero(A)):
        part = np.zeros_like(A)
        part[j, i] = A[j, i]
        parts.append(part)
    return parts


def cover_spec_from_poly(M: PolyMatrix, kind: str = "gcc1") -> CoverSpec:
    """Cover spec of a quasi-cyclic matrix: one circulant part per exponent.

    ``gcc1`` of the result equals ``expand_poly(M)``.
    """
    if M.modulus is None:
        raise ValueError("need a modulus r for a finite cover")
    proto = np.array([[len(c) for c in row] for row in M.entries], dtype=np.int64)
    parts = []
    for j, row in enumerate(M.entries):
        for i, cell in enumerate(row):
            for s in sorted(cell):
                A = np.zeros_like(proto)
                A[j, i] = 1
                parts.append((A, CirculantShift(s, M.modulus)))
    return CoverSpec(proto, tuple(parts), kind)


def _adjacency_counts(M) -> sp.csr_matrix:
    if isinstance(M, SparseBinMatrix):
        return M.to_scipy()
    if sp.issparse(M):
        return sp.csr_matrix(M, dtype=np.int64)
    return sp.csr_matrix(_int_matrix(M))


def validate_cover(base, cover, var_proj, chk_proj) -> bool:
    """Check that ``(var_proj, chk_proj)`` makes ``cover`` a graph cover of ``base``.

    Both graphs may carry edge multiplicities (integer matrices).  Every
    cover node must see, through the projection, exactly the neighbourhood
    multiset of its image, and all fibres must have the same size.
    """
    Bc = _adjacency_counts(base)
    Cc = _adjacency_counts(cover)
    var_proj = np.asarray(var_proj, dtype=np.int64)
    chk_proj = np.asarray(chk_proj, dtype=np.int64)
    if var_proj.shape != (Cc.shape[1],) or chk_proj.shape != (Cc.shape[0],):
        raise ValueError("projection sizes do not match the cover")
    if (var_proj.min(initial=0) < 0 or var_proj.max(initial=-1) >= Bc.shape[1]
            or chk_proj.min(initial=0) < 0 or chk_proj.max(initial=-1) >= Bc.shape[0]):
        raise ValueError("projection maps outside the base graph")
    vf = np.bincount(var_proj, minlength=Bc.shape[1])
    cf = np.bincount(chk_proj, minlength=Bc.shape[0])
    if np.any(vf == 0) or np.any(cf == 0):
        raise ValueError("projection is not surjective")
    fibre = set(vf.tolist()) | set(cf.tolist())
    if len(fibre) != 1:
        return False
    # Aggregate cover edges by (cover check, base var) and (base check, cover var).
    coo = Cc.tocoo()
    rows, cols, w = coo.row, coo.col, coo.data.astype(np.int64)
    by_check = sp.csr_matrix((w, (rows, var_proj[cols])), shape=(Cc.shape[0], Bc.shape[1]))
    by_var = sp.csr_matrix((w, (chk_proj[rows], cols)), shape=(Bc.shape[0], Cc.shape[1]))
    want_check = Bc[chk_proj, :]
    want_var = Bc[:, var_proj]
    return (by_check != want_check).nnz == 0 and (by_var != want_var).nnz == 0


def shuffle_witness(m_A: int, n_A: int, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column orders with ``gcc1(spec)[rows][:, cols] == gcc2(spec)``.

    The reordering is the perfect shuffle and does not depend on the parts.
    """
    kr = np.arange(r * m_A)
    kc = np.arange(r * n_A)
    rows = (kr % m_A) * r + kr // m_A
    cols = (kc % n_A) * r + kc // n_A
    return rows, cols


# ---------------------------------------------------------------------------
# parts file
# ---------------------------------------------------------------------------

def _format_perm(P: PermSpec) -> str:
    if isinstance(P, CirculantShift):
        return f"circ {P.s} {P.r}"
    if isinstance(P, ToeplitzShift):
        return f"toep {P.s}"
    if isinstance(P, Identity):
        return f"id {P.r}"
    return "perm " + ",".join(str(x) for x in P.perm)


def _parse_perm(tokens: Sequence[str]) -> PermSpec:
    kind = tokens[0]
    if kind == "circ" and len(tokens) == 3:
        return CirculantShift(int(tokens[1]), int(tokens[2]))
    if kind == "toep" and len(tokens) == 2:
        return ToeplitzShift(int(tokens[1]))
    if kind == "id" and len(tokens) == 2:
        return Identity(int(tokens[1]))
    if kind == "perm" and len(tokens) == 2:
        return Explicit(tuple(int(x) for x in tokens[1].split(",")))
    raise ValueError(f"bad permutation spec: {' '.join(tokens)!r}")


def format_parts(spec: CoverSpec) -> str:
    """Self-contained text form: kind, proto grid, then one line per part.

    Part lines read ``<perm spec> : j,i,value j,i,value ...``.
    """
    m, n = spec.proto.shape
    lines = [f"kind {spec.kind}", f"proto {m} {n}"]
    lines += [" ".join(str(int(x)) for x in row) for row in spec.proto]
    for A, P in spec.parts:
        cells = " ".join(f"{j},{i},{int(A[j, i])}" for j, i in zip(*np.nonzero(A)))
        lines.append(f"{_format_perm(P)} : {cells}")
    return "\n".join(lines) + "\n"


def parse_parts(text: str) -> CoverSpec:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(lines) < 2 or not lines[0].startswith("kind ") or not lines[1].startswith("proto "):
        raise ValueError("parts file must start with 'kind ...' and 'proto m n' lines")
    kind = lines[0].split()[1]
    _, m, n = lines[1].split()
    m, n = int(m), int(n)
    if len(lines) < 2 + m:
        raise ValueError("parts file proto grid is truncated")
    proto = np.array([[int(x) for x in ln.split()] for ln in lines[2:2 + m]], dtype=np.int64)
    if proto.shape != (m, n):
        raise ValueError("proto grid does not match the declared shape")
    parts = []
    for ln in lines[2 + m:]:
        if ":" not in ln:
            raise ValueError(f"part line lacks ':' separator: {ln!r}")
        head, cells = ln.split(":", 1)
        P = _parse_perm(head.split())
        A = np.zeros((m, n), dtype=np.int64)
        for cell in cells.split():
            j, i, v = (int(x) for x in cell.split(","))
            A[j, i] += v
        parts.append((A, P))
    return CoverSpec(proto, tuple(parts), kind)


def write_parts(spec: CoverSpec, path) -> None:
    Path(path).write_text(format_parts(spec))


def read_parts(path) -> CoverSpec:
    return parse_parts(Path(path).read_text())
