from __future__ import annotations

import itertools
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldpcconv import codes
from ldpcconv.analysis import (
    INF,
    PseudoCodeword,
    active_part_has_cycle,
    conv_cycle_spectrum,
    count_cycles,
    cycle_spectrum,
    format_pseudoweights,
    format_spectrum_csv,
    fundamental_polytope_contains,
    girth,
    project_pseudocodeword,
    pseudoweights,
)
from ldpcconv.convcode import ConvCode
from ldpcconv.cover import CoverSpec, Explicit, build_cover, per_entry_decomposition
from ldpcconv.gf2 import SparseBinMatrix, gf2_nullspace


def tanner_nx(H: SparseBinMatrix) -> nx.Graph:
    G = nx.Graph()
    G.add_edges_from((("c", int(j)), ("v", int(i))) for j, i in zip(H.row_ids(), H.indices))
    return G


def dfs_cycle_counts(H: SparseBinMatrix, max_len: int) -> dict[int, int]:
    out = {k: 0 for k in range(4, max_len + 1, 2)}
    for cyc in nx.simple_cycles(tanner_nx(H), length_bound=max_len):
        out[len(cyc)] += 1
    return out


def random_sparse(rng, m, n, p) -> SparseBinMatrix:
    return SparseBinMatrix.from_dense((rng.random((m, n)) < p).astype(np.uint8))


def codewords(H: SparseBinMatrix, limit: int = 256) -> list[np.ndarray]:
    basis = gf2_nullspace(H)
    out = []
    for k in range(1, len(basis) + 1):
        for s in itertools.combinations(range(len(basis)), k):
            out.append(np.bitwise_xor.reduce(basis[list(s)], axis=0))
            if len(out) >= limit:
                return out
    return out


class TestGirth:
    def test_tanner(self):
        assert girth(codes.tanner_qc_matrix(31)) == 8

    def test_four_cycle(self):
        assert girth(SparseBinMatrix.from_dense([[1, 1], [1, 1]])) == 4

    def test_forest(self):
        assert girth(SparseBinMatrix.from_dense([[1, 1, 0], [0, 1, 1]])) == INF
        assert girth(SparseBinMatrix.zeros(3, 3)) == INF

    def test_against_networkx(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            H = random_sparse(rng, 8, 14, 0.2)
            try:
                want = nx.girth(tanner_nx(H))
            except AttributeError:  # pragma: no cover
                pytest.skip("networkx without girth")
            assert girth(H) == want


class TestCycleSpectrum:
    @pytest.mark.parametrize("r, want", [
        (31, (3.000, 24.000, 146.000)),
        (48, (2.600, 14.000, 93.400)),
        (80, (2.200, 12.400, 70.600)),
    ])
    def test_block_codes(self, r, want):
        s = cycle_spectrum(codes.tanner_qc_matrix(r), 12)
        assert tuple(s.rounded()[k] for k in (8, 10, 12)) == want
        assert s.basis == 5 * r

    def test_matches_dfs_on_random_graphs(self):
        rng = np.random.default_rng(2024)
        done = 0
        while done < 50:
            m = int(rng.integers(4, 20))
            n = int(rng.integers(m + 1, 61 - m))
            H = random_sparse(rng, m, n, float(rng.uniform(0.08, 0.3)))
            g = girth(H)
            if g == INF:
                continue
            max_len = int(min(2 * g - 2, 12))
            assert cycle_spectrum(H, max_len).counts == dfs_cycle_counts(H, max_len)
            done += 1

    def test_refuses_twice_girth(self):
        with pytest.raises(ValueError):
            cycle_spectrum(codes.tanner_qc_matrix(31), 16)

    def test_empty(self):
        assert count_cycles(SparseBinMatrix.zeros(2, 2), [4, 6]) == {4: 0, 6: 0}

    def test_csv(self):
        s = cycle_spectrum(codes.tanner_qc_matrix(31), 12)
        text = format_spectrum_csv(s)
        assert text.splitlines()[0] == "length,count,normalized_avg"
        assert "8,465,3.000000" in text.splitlines()


class TestConvSpectrum:
    def test_time_invariant(self):
        s = conv_cycle_spectrum(codes.tanner_time_invariant(), 12)
        assert tuple(s.rounded()[k] for k in (8, 10, 12)) == (2.200, 12.400, 70.200)

    @pytest.mark.parametrize("r, want", [
        (31, (0.910, 8.342, 44.813)),
        (48, (0.917, 5.338, 30.242)),
        (80, (0.675, 4.705, 24.585)),
    ])
    def test_time_varying(self, r, want):
        s = conv_cycle_spectrum(codes.tanner_time_varying(r), 12)
        assert tuple(s.rounded()[k] for k in (8, 10, 12)) == want

    def test_memoryless_copy(self):
        H = codes.tanner_qc_matrix(31)
        code = ConvCode(H.cols, H.cols - H.rows, 0, 1, ((H,),))
        assert conv_cycle_spectrum(code, 12).normalized == cycle_spectrum(H, 12).normalized


class TestPseudoWeights:
    def test_codeword(self):
        w = pseudoweights([1, 0, 1, 1, 0, 1])
        assert (w.awgnc, w.bsc, w.bec) == (4, 4, 4)

    def test_direct_formula(self):
        w = pseudoweights([2, 1, 1, 0])
        assert w.awgnc == Fraction(8, 3)
        assert w.bsc == 2
        assert w.bec == 3

    def test_bsc_interpolates(self):
        # mass 7, half 3.5: the 3 covers 3, a further 1/2 of the next 1
        assert pseudoweights([3, 1, 1, 1, 1]).bsc == 2 * (1 + Fraction(1, 2))

    def test_zero(self):
        with pytest.raises(ValueError):
            pseudoweights([0, 0])
        with pytest.raises(ValueError):
            PseudoCodeword((1, -1))

    def test_format(self):
        text = format_pseudoweights(pseudoweights([2, 1, 1, 0]), True, False)
        assert text == ("awgnc=2.66667\nawgnc_exact=8/3\nbsc=2\nbsc_exact=2\nbec=3\n"
                        "in_fundamental_polytope=true\nactive_part_has_cycle_or_leaf=false\n")


class TestProjection:
    def test_identity_cover(self):
        om = (Fraction(1, 2), 0, 1)
        assert project_pseudocodeword(om, 1, [0, 1, 2]).omega == tuple(Fraction(x) for x in om)

    def test_uniform(self):
        assert project_pseudocodeword([1] * 12, 4, np.repeat(np.arange(3), 4)).omega == (1, 1, 1)

    def test_malformed(self):
        with pytest.raises(ValueError):
            project_pseudocodeword([1, 1, 1], 2, [0, 0, 1])
        with pytest.raises(ValueError):
            project_pseudocodeword([1, 1, 1, 1], 2, [0, 0, 0, 1])

    def test_small_cover_codewords(self):
        from ldpcconv.gf2 import expand_poly
        B = expand_poly(codes.small_poly(7))
        fiber = np.arange(21) // 7
        A = SparseBinMatrix.from_dense(np.ones((2, 3), dtype=np.uint8))
        words = codewords(B)
        assert words
        for c in words:
            om = project_pseudocodeword(c, 7, fiber)
            assert all((7 * x).denominator == 1 and 0 <= x <= 1 for x in om.omega)
            assert fundamental_polytope_contains(A, om)


class TestPolytope:
    def test_codeword_inside(self):
        H = codes.hamming_8_4()
        for c in codewords(H):
            assert fundamental_polytope_contains(H, c)

    def test_all_ones_on_odd_check(self):
        assert not fundamental_polytope_contains(SparseBinMatrix.from_dense([[1, 1, 1]]), [1, 1, 1])

    def test_box(self):
        assert not fundamental_polytope_contains(SparseBinMatrix.from_dense([[1, 1]]), [2, 2])

    def test_half_vector(self):
        H = SparseBinMatrix.from_dense([[1, 1, 1]])
        assert fundamental_polytope_contains(H, [Fraction(1, 2)] * 3)
        assert not fundamental_polytope_contains(H, [1, 0, 0])

    def test_row_weight_bound(self):
        with pytest.raises(ValueError):
            fundamental_polytope_contains(SparseBinMatrix.from_dense(np.ones((1, 13))), [0] * 13)


@st.composite
def explicit_covers(draw):
    m = draw(st.integers(2, 3))
    n = draw(st.integers(m + 1, 5))
    A = np.array(draw(st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=m, max_size=m)))
    A[:, 0] = 1
    A[0, :] = 1
    M = draw(st.integers(2, 4))
    parts = tuple((p, Explicit(tuple(draw(st.permutations(range(M)))))) for p in per_entry_decomposition(A))
    return CoverSpec(A, parts, draw(st.sampled_from(["gcc1", "gcc2"])))


class TestLemma:
    @settings(max_examples=30, deadline=None)
    @given(explicit_covers())
    def test_projected_cover_codewords(self, spec):
        cov = build_cover(spec)
        base = SparseBinMatrix.from_dense(spec.proto)
        M = spec.r
        for c in codewords(cov.matrix, limit=16):
            om = project_pseudocodeword(c, M, cov.var_proj)
            assert fundamental_polytope_contains(base, om)
            wt, w = pseudoweights(c), pseudoweights(om)
            assert wt.awgnc >= w.awgnc and wt.bsc >= w.bsc and wt.bec >= w.bec
            assert active_part_has_cycle(base, om)


class TestActivePart:
    def test_codeword_support(self):
        from ldpcconv.gf2 import expand_poly
        B = expand_poly(codes.small_poly(7))
        for c in codewords(B, limit=20):
            assert active_part_has_cycle(B, c)

    def test_empty(self):
        assert not active_part_has_cycle(codes.hamming_8_4(), [0] * 8)

    def test_degree_one_bit(self):
        H = SparseBinMatrix.from_dense([[1, 1, 0], [0, 1, 1]])
        assert active_part_has_cycle(H, [1, 0, 0])

    def test_single_bit_of_degree_three(self):
        # a star has neither a cycle nor a bit of degree one
        H = SparseBinMatrix.from_dense([[1, 1], [1, 0], [1, 1]])
        assert not active_part_has_cycle(H, [1, 0])

    def test_cycle(self):
        H = SparseBinMatrix.from_dense([[1, 1], [1, 1]])
        assert active_part_has_cycle(H, [1, 1])
