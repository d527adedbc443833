"""Reference codes used by the tests, the demos and the command line."""
from __future__ import annotations

import numpy as np

from .convcode import ConvCode, from_tanner_poly
from .gf2 import PolyMatrix, SparseBinMatrix, expand_poly
from .unwrap import diagonal_cut_code, tanner_unwrap

TANNER_EXPONENTS = ((1, 2, 4, 8, 16), (5, 10, 20, 9, 18), (25, 19, 7, 14, 28))
SMALL_EXPONENTS = ((1, 2, 4), (6, 5, 3))

# 5 x 10 (3,6)-regular matrix used to illustrate the diagonal cut
RATE_HALF_10 = np.array([
    [0, 0, 1, 1, 1, 0, 1, 1, 1, 0],
    [0, 1, 1, 1, 0, 1, 0, 0, 1, 1],
    [1, 1, 1, 0, 0, 1, 1, 1, 0, 0],
    [1, 0, 0, 1, 1, 0, 0, 1, 1, 1],
    [1, 1, 0, 0, 1, 1, 1, 0, 0, 1],
], dtype=np.uint8)


def tanner_poly(r: int = 31) -> PolyMatrix:
    """3 x 5 monomial matrix over ``F2[X]/(X^r-1)`` with the (3,5) exponent pattern."""
    if r <= 28:
        raise ValueError("the exponent pattern needs r > 28")
    return PolyMatrix.from_exponents(TANNER_EXPONENTS, r)


def tanner_qc_matrix(r: int = 31) -> SparseBinMatrix:
    return expand_poly(tanner_poly(r))


def tanner_time_invariant() -> ConvCode:
    """Polynomially unwrapped (3,5) code: rate 2/5, m_s = 28."""
    return from_tanner_poly(tanner_unwrap(tanner_poly(31)))


def tanner_time_varying(r: int = 31) -> ConvCode:
    """Diagonal cut of the scalar QC matrix: rate 2/5, m_s = r - 1, period r."""
    return diagonal_cut_code(tanner_qc_matrix(r), 1)


def small_poly(r: int = 7) -> PolyMatrix:
    return PolyMatrix.from_exponents(SMALL_EXPONENTS, r)


def rate_half_10() -> SparseBinMatrix:
    return SparseBinMatrix.from_dense(RATE_HALF_10)


def toy_code() -> ConvCode:
    """Rate-1/3, m_s = 2 time-invariant code (constraint length 9) with a
    systematic encoder."""
    return from_tanner_poly(PolyMatrix.from_exponents([[0, 1, 2], [2, 0, 1]]))


def hamming_8_4() -> SparseBinMatrix:
    """Extended Hamming [8,4,4] code."""
    return SparseBinMatrix.from_dense(np.array([
        [1, 1, 1, 1, 0, 0, 0, 0],
        [0, 0, 1, 1, 1, 1, 0, 0],
        [0, 1, 0, 1, 0, 1, 0, 1],
        [1, 1, 1, 1, 1, 1, 1, 1],
    ], dtype=np.uint8))


def regular_matrix(m: int, n: int, J: int, seed: int) -> SparseBinMatrix:
    """Random ``(J, K)``-regular matrix without repeated entries (``K = J n / m``).

    Socket matching by a seeded random permutation, retried until no check
    receives the same bit twice.
    """
    if (J * n) % m:
        raise ValueError("J*n must be divisible by m")
    K = J * n // m
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    bit_sockets = np.repeat(np.arange(n), J)
    for _ in range(1000):
        chk = np.repeat(np.arange(m), K)[rng.permutation(J * n)]
        key = chk * n + bit_sockets
        if len(np.unique(key)) == len(key):
            return SparseBinMatrix.from_coords(m, n, chk, bit_sockets)
        # repair pass: swap colliding sockets with random partners
        for _ in range(200):
            key = chk * n + bit_sockets
            _, first, counts = np.unique(key, return_index=True, return_counts=True)
            dup = np.setdiff1d(np.arange(len(key)), first)
            if len(dup) == 0:
                return SparseBinMatrix.from_coords(m, n, chk, bit_sockets)
            partners = rng.integers(0, len(key), size=len(dup))
            chk[dup], chk[partners] = chk[partners].copy(), chk[dup].copy()
    raise RuntimeError("could not build a simple regular matrix")
