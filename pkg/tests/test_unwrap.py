from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldpcconv import codes
from ldpcconv.convcode import from_tanner_poly, is_valid_stream, materialize_window, terminated_matrix, unblock
from ldpcconv.cover import CirculantShift, CoverSpec, ToeplitzShift, gcc2, per_entry_decomposition
from ldpcconv.gf2 import PolyMatrix, SparseBinMatrix, expand_poly, gf2_nullspace, same_row_space
from ldpcconv.unwrap import (
    Decomposition,
    cut_params,
    diagonal_cut_code,
    diagonal_cut_memory,
    diagonal_cut_offsets,
    from_toeplitz_cover,
    jfz_diagonal_cut,
    jfz_random_cut,
    jfz_unwrap,
    pad_for_cut,
    read_decomposition,
    reduce_memory,
    tanner_unwrap,
    tanner_wrap,
    wrap_stream,
    write_decomposition,
)

SMALL_SHIFTS = {(0, 0): 1, (0, 1): 2, (0, 2): 4, (1, 0): 6, (1, 1): 5, (1, 2): 3}


def small_bbar(r: int = 7) -> SparseBinMatrix:
    parts = per_entry_decomposition(np.ones((2, 3), dtype=int))
    pairs = tuple((A, CirculantShift(SMALL_SHIFTS[tuple(np.argwhere(A)[0])], r)) for A in parts)
    return gcc2(CoverSpec(np.ones((2, 3), dtype=int), pairs, "gcc2"))


def rows_as_set(M: SparseBinMatrix) -> set[tuple[int, ...]]:
    return {tuple(M.row(j)) for j in range(M.rows)}


def poly(exps) -> np.ndarray:
    p = np.zeros(max(exps) + 1, dtype=np.int64)
    p[list(exps)] = 1
    return p


def pmul(a, b) -> np.ndarray:
    return np.convolve(a, b) % 2


def padd(a, b) -> np.ndarray:
    n = max(len(a), len(b))
    return (np.pad(a, (0, n - len(a))) + np.pad(b, (0, n - len(b)))) % 2


def minors_codeword(exps, u) -> np.ndarray:
    """Time-major stream of ``u(D) * (minor_0, minor_1, minor_2)`` for a 2 x 3 monomial matrix."""
    h = [[poly([e]) for e in row] for row in exps]
    comps = []
    for k in range(3):
        a, b = [i for i in range(3) if i != k]
        comps.append(pmul(u, padd(pmul(h[0][a], h[1][b]), pmul(h[0][b], h[1][a]))))
    T = max(len(x) for x in comps)
    out = np.zeros((T, 3), dtype=np.uint8)
    for k, x in enumerate(comps):
        out[: len(x), k] = x
    return out.ravel()


def same_blocks(a, b) -> bool:
    return (a.c, a.b, a.m_s, a.T_s) == (b.c, b.b, b.m_s, b.T_s) and all(
        x == y for ra, rb in zip(a.blocks, b.blocks) for x, y in zip(ra, rb))


class TestTannerRoute:
    def test_unwrap_keeps_exponents(self):
        D = tanner_unwrap(codes.small_poly(7))
        assert D.modulus is None
        assert D == PolyMatrix.from_exponents(codes.SMALL_EXPONENTS)
        code = from_tanner_poly(D)
        assert (code.c, code.b, code.m_s, code.nu_s) == (3, 1, 6, 21)

    def test_unwrap_needs_modulus(self):
        with pytest.raises(ValueError):
            tanner_unwrap(PolyMatrix.from_exponents([[1, 2]]))

    def test_wrap(self):
        assert tanner_wrap([[1], [8], [0, 7]], 7) == [frozenset({1}), frozenset({1}), frozenset()]
        with pytest.raises(ValueError):
            tanner_wrap([[1]], 0)

    def test_tanner_ti_params(self):
        code = codes.tanner_time_invariant()
        assert (code.c, code.b, code.m_s, code.nu_s, code.T_s) == (5, 2, 28, 145, 1)

    def test_wrapped_codeword_is_qc_codeword(self):
        # u(D) times the 2x2 minors of H(D) is a finite codeword of the unwrapped code
        code = from_tanner_poly(tanner_unwrap(codes.small_poly(7)))
        H7 = expand_poly(codes.small_poly(7))
        rng = np.random.default_rng(3)
        for _ in range(10):
            v = minors_codeword(codes.SMALL_EXPONENTS, rng.integers(0, 2, 6))
            assert v.any()
            assert is_valid_stream(code, v)
            assert not H7.syndrome(wrap_stream(v, 3, 7)).any()

    def test_wrap_stream_layout(self):
        v = np.zeros(3 * 9, dtype=np.uint8)
        v[1] = 1           # component 1 at time 0
        v[3 * 8 + 2] = 1   # component 2 at time 8 -> time 1 mod 7
        w = wrap_stream(v, 3, 7)
        assert np.flatnonzero(w).tolist() == [7, 15]


class TestReduceMemory:
    def test_example(self):
        R = reduce_memory(PolyMatrix.from_exponents(codes.SMALL_EXPONENTS))
        assert R == PolyMatrix.from_exponents([[0, 1, 3], [3, 2, 0]])
        assert R.max_exponent() == 3

    def test_windows_differ_only_in_row_order(self):
        D = PolyMatrix.from_exponents(codes.SMALL_EXPONENTS)
        a = terminated_matrix(from_tanner_poly(D), 30)
        b = terminated_matrix(from_tanner_poly(reduce_memory(D)), 30)
        assert a.rows == b.rows
        assert rows_as_set(a) == rows_as_set(b)

    def test_rejects(self):
        with pytest.raises(ValueError):
            reduce_memory(codes.small_poly(7))
        with pytest.raises(ValueError):
            reduce_memory(PolyMatrix.from_exponents([[None, None, None], [1, 2, 3]]))

    @given(st.lists(st.lists(st.sets(st.integers(0, 9), max_size=2), min_size=3, max_size=3), min_size=1, max_size=2))
    def test_each_row_starts_at_zero(self, grid):
        if any(not any(cell for cell in row) for row in grid):
            return
        R = reduce_memory(PolyMatrix.from_exponents(grid))
        for row in R.entries:
            assert min(e for cell in row for e in cell) == 0


class TestDiagonalCut:
    def test_small_cut(self):
        H = codes.rate_half_10()
        p = cut_params(H.rows, H.cols)
        assert (p.eta, p.c, p.b, p.m_s, p.T_s, p.nu_s) == (5, 2, 1, 4, 5, 10)
        code = diagonal_cut_code(H)
        assert (code.c, code.b, code.m_s, code.T_s, code.nu_s) == (2, 1, 4, 5, 10)
        cols, rows = code.period_profile()
        assert set(cols) == {3} and set(rows) == {6}

    def test_parts_sum_to_matrix(self):
        H = codes.rate_half_10()
        d = jfz_diagonal_cut(H)
        assert d.total() == H
        lower = d.parts[0].to_dense()
        for j, i in np.argwhere(lower):
            assert i // 2 <= j

    def test_ell_equal_eta_is_trivial(self):
        H = codes.rate_half_10()
        code = diagonal_cut_code(H, 5)
        assert (code.m_s, code.T_s, code.c) == (0, 1, 10)
        assert code.H(0, 0) == H

    def test_ell_must_divide(self):
        with pytest.raises(ValueError):
            cut_params(5, 10, 2)
        with pytest.raises(ValueError):
            cut_params(5, 10, 0)

    def test_report(self):
        assert cut_params(1024, 2048, 4).report() == "eta=1024 ell=4 b'=4 c'=8 m_s'=255 T_s'=256 nu_s'=2048"

    def test_tanner_time_varying(self):
        code = codes.tanner_time_varying(31)
        assert (code.c, code.b, code.m_s, code.T_s, code.nu_s) == (5, 2, 30, 31, 155)
        cols, rows = code.period_profile()
        assert set(cols) == {3} and set(rows) == {5}

    @pytest.mark.parametrize("ell", [1, 2, 4, 8, 16, 32, 64])
    def test_offsets_match_built_code(self, ell):
        H = codes.regular_matrix(64, 128, 3, 1)
        code = diagonal_cut_code(H, ell)
        assert code.m_s == diagonal_cut_memory(H, ell) == 64 // ell - 1
        assert code.nu_s == 128

    def test_offsets_range(self):
        H = codes.regular_matrix(32, 64, 3, 2)
        off = diagonal_cut_offsets(H, 2)
        assert off.min() >= 0 and off.max() <= 15
        assert len(off) == H.nnz

    def test_bridge_to_tanner(self):
        # The lower/upper block split of the r=7 block-circulant matrix is the
        # diagonal cut; refined to single blocks it is the polynomial code.
        Bbar = small_bbar(7)
        d = jfz_diagonal_cut(Bbar)
        coarse = jfz_unwrap(d)
        assert (coarse.c, coarse.m_s) == (21, 1)
        fine = unblock(coarse, 7)
        poly = from_tanner_poly(tanner_unwrap(codes.small_poly(7)))
        assert same_blocks(fine, poly)
        a = terminated_matrix(fine, 30)
        b = terminated_matrix(poly, 30)
        assert rows_as_set(a) == rows_as_set(b)
        na, nb = gf2_nullspace(a), gf2_nullspace(b)
        assert na.shape == nb.shape and same_row_space(na, nb)

    def test_seven_part_decomposition(self):
        # H_d = the entry whose shift is d, H_0 = 0
        parts = [np.zeros((2, 3), dtype=np.uint8) for _ in range(7)]
        for (j, i), s in SMALL_SHIFTS.items():
            parts[s][j, i] = 1
        d = Decomposition(tuple(SparseBinMatrix.from_dense(P) for P in parts))
        assert d.total() == SparseBinMatrix.from_dense(np.ones((2, 3)))
        code = jfz_unwrap(d)
        assert same_blocks(code, from_tanner_poly(tanner_unwrap(codes.small_poly(7))))


class TestRandomCut:
    def test_reproducible(self):
        H = codes.tanner_qc_matrix(31)
        a, b = jfz_random_cut(H, 11), jfz_random_cut(H, 11)
        assert all(x == y for x, y in zip(a.parts, b.parts))
        c = jfz_random_cut(H, 12)
        assert a.parts[0] != c.parts[0]

    def test_coin_stream(self):
        H = codes.rate_half_10()
        d = jfz_random_cut(H, 0)
        coin = np.random.Generator(np.random.Philox(np.random.SeedSequence(0))).integers(0, 2, H.nnz)
        dense = H.to_dense()
        pos = np.argwhere(dense)  # row-major order
        upper = np.zeros_like(dense)
        upper[tuple(pos[coin == 1].T)] = 1
        assert np.array_equal(d.parts[1].to_dense(), upper)

    @settings(max_examples=20)
    @given(st.integers(0, 2**32 - 1))
    def test_degrees_kept(self, seed):
        H = codes.rate_half_10()
        d = jfz_random_cut(H, seed)
        assert d.total() == H
        cols, rows = jfz_unwrap(d).period_profile()
        assert set(cols) == {3} and set(rows) == {6}

    def test_overlap_rejected(self):
        H = codes.rate_half_10()
        with pytest.raises(ValueError):
            Decomposition((H, H))


class TestPadding:
    def test_pad(self):
        H = SparseBinMatrix.from_dense(np.ones((2, 3), dtype=np.uint8))
        P, mask = pad_for_cut(H, [1])
        assert P.shape == (2, 4)
        assert mask.tolist() == [0, 1, 0, 0]
        assert P.to_dense()[:, 1].sum() == 0
        assert cut_params(*P.shape).eta == 2
        assert np.array_equal(P.to_dense()[:, mask == 0], H.to_dense())

    def test_bad_positions(self):
        H = codes.rate_half_10()
        with pytest.raises(ValueError):
            pad_for_cut(H, [3, 3])
        with pytest.raises(ValueError):
            pad_for_cut(H, [11])


class TestToeplitzCover:
    def test_small_example(self):
        A = np.ones((2, 3), dtype=int)
        parts = per_entry_decomposition(A)
        pairs = tuple((P, ToeplitzShift(SMALL_SHIFTS[tuple(np.argwhere(P)[0])])) for P in parts)
        code = from_toeplitz_cover(CoverSpec(A, pairs, "gcc2"))
        assert same_blocks(code, from_tanner_poly(tanner_unwrap(codes.small_poly(7))))

    def test_requires_toeplitz(self):
        A = np.ones((1, 2), dtype=int)
        with pytest.raises(ValueError):
            from_toeplitz_cover(CoverSpec(A, ((A, CirculantShift(0, 3)),)))


def test_decomposition_round_trip(tmp_path):
    d = jfz_random_cut(codes.tanner_qc_matrix(31), 4)
    write_decomposition(d, tmp_path / "dec")
    back = read_decomposition(tmp_path / "dec")
    assert all(x == y for x, y in zip(d.parts, back.parts))


def test_window_matches_scalar_matrix():
    # a TI code built from a decomposition: window rows reproduce the parts
    d = jfz_diagonal_cut(codes.rate_half_10())
    W = materialize_window(jfz_unwrap(d), 0, 3, tail=False).to_dense()
    H0 = d.parts[0].to_dense()
    keep0 = H0.any(axis=1)
    assert np.array_equal(W[: keep0.sum(), :10], H0[keep0])
