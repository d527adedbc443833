from __future__ import annotations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldpcconv import codes
from ldpcconv.analysis import count_cycles, girth
from ldpcconv.cover import (
    CirculantShift,
    CoverSpec,
    Explicit,
    Identity,
    ToeplitzShift,
    build_cover,
    cover_spec_from_poly,
    format_parts,
    gcc1,
    gcc2,
    kron_perm,
    parse_parts,
    per_entry_decomposition,
    shuffle_witness,
    validate_cover,
)
from ldpcconv.gf2 import ParallelEdgeWarning, SparseBinMatrix, degree_profile, expand_poly

ONES_2x3 = np.ones((2, 3), dtype=int)


def small_spec(kind: str) -> CoverSpec:
    parts = per_entry_decomposition(ONES_2x3)
    shifts = [1, 2, 4, 6, 5, 3]
    return CoverSpec(ONES_2x3, tuple((A, CirculantShift(s, 7)) for A, s in zip(parts, shifts)), kind)


def tanner_graph(H: SparseBinMatrix) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from((("v", i) for i in range(H.cols)), side=0)
    G.add_nodes_from((("c", j) for j in range(H.rows)), side=1)
    G.add_edges_from((("c", int(j)), ("v", int(i))) for j, i in zip(H.row_ids(), H.indices))
    return G


@st.composite
def random_specs(draw, max_r=5, kind=None):
    m = draw(st.integers(1, 3))
    n = draw(st.integers(m + 1, 4))
    r = draw(st.integers(1, max_r))
    A = np.array(draw(st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=m, max_size=m)))
    A[draw(st.integers(0, m - 1)), draw(st.integers(0, n - 1))] = 1
    parts = []
    for part in per_entry_decomposition(A):
        perm = draw(st.permutations(range(r)))
        parts.append((part, Explicit(tuple(perm))))
    k = kind or draw(st.sampled_from(["gcc1", "gcc2"]))
    return CoverSpec(A, tuple(parts), k)


class TestKronPerm:
    def test_single_cycle(self):
        P = kron_perm([[1]], CirculantShift(2, 5)).toarray()
        assert np.array_equal(P, np.roll(np.eye(5, dtype=int), 2, axis=0))
        G = nx.from_numpy_array(P, create_using=nx.DiGraph)
        assert len(list(nx.simple_cycles(G))) == 1

    def test_single_block(self):
        A = np.zeros((2, 3), dtype=int)
        A[0, 0] = 1
        B = kron_perm(A, CirculantShift(1, 7)).toarray()
        assert B.shape == (14, 21)
        assert np.array_equal(B[:7, :7], np.roll(np.eye(7, dtype=int), 1, axis=0))
        assert B.sum() == 7

    def test_multiplicity_kept(self):
        A = np.array([[2, 1]])
        B = kron_perm(A, Identity(2)).toarray()
        assert np.array_equal(B, np.kron(A, np.eye(2, dtype=int)))
        assert B.sum(axis=0).tolist() == [2, 2, 1, 1]

    def test_toeplitz_refused(self):
        with pytest.raises(TypeError):
            kron_perm([[1]], ToeplitzShift(1))

    @given(random_specs())
    def test_matches_dense_kron(self, spec):
        for A, P in spec.parts:
            dense_P = np.zeros((P.size, P.size), dtype=int)
            dense_P[P.image(), np.arange(P.size)] = 1
            assert np.array_equal(kron_perm(A, P).toarray(), np.kron(A, dense_P))


class TestPermSpec:
    def test_bad_explicit(self):
        with pytest.raises(ValueError):
            Explicit((0, 0, 1))

    def test_bad_circulant(self):
        with pytest.raises(ValueError):
            CirculantShift(5, 5)

    def test_mixed_sizes(self):
        A = np.array([[1, 1]])
        p = per_entry_decomposition(A)
        with pytest.raises(ValueError):
            CoverSpec(A, ((p[0], Identity(3)), (p[1], Identity(4))))
        with pytest.raises(ValueError):
            CoverSpec(A, ((p[0], Identity(3)), (p[1], ToeplitzShift(1))))

    def test_parts_must_sum(self):
        with pytest.raises(ValueError):
            CoverSpec(np.array([[1, 1]]), ((np.array([[1, 0]]), Identity(2)),))


class TestGcc:
    def test_gcc1_equals_circulant_expansion(self):
        B = gcc1(small_spec("gcc1"))
        assert B == expand_poly(codes.small_poly(7))

    def test_gcc2_block_circulant(self):
        Bbar = gcc2(small_spec("gcc2")).to_dense()
        shift_of = {(0, 0): 1, (0, 1): 2, (0, 2): 4, (1, 0): 6, (1, 1): 5, (1, 2): 3}
        for kr in range(7):
            for kc in range(7):
                blk = Bbar[2 * kr:2 * kr + 2, 3 * kc:3 * kc + 3]
                want = np.zeros((2, 3), dtype=np.uint8)
                for (j, i), s in shift_of.items():
                    if kr == (kc + s) % 7:
                        want[j, i] = 1
                assert np.array_equal(blk, want)

    def test_identity_copies(self):
        A = codes.RATE_HALF_10.astype(int)
        s1 = CoverSpec(A, ((A, Identity(3)),), "gcc1")
        s2 = s1.with_kind("gcc2")
        assert np.array_equal(gcc1(s1).to_dense(), np.kron(A, np.eye(3, dtype=int)))
        assert np.array_equal(gcc2(s2).to_dense(), np.kron(np.eye(3, dtype=int), A))
        assert nx.number_connected_components(tanner_graph(gcc1(s1))) == 3

    def test_tanner_31(self):
        H = gcc1(cover_spec_from_poly(codes.tanner_poly(31), "gcc1"))
        assert H.shape == (93, 155)
        assert set(H.col_degrees()) == {3}
        assert H == codes.tanner_qc_matrix(31)

    def test_kind_checked(self):
        with pytest.raises(ValueError):
            gcc2(small_spec("gcc1"))

    @settings(max_examples=40)
    @given(random_specs())
    def test_degree_replication(self, spec):
        cov = build_cover(spec)
        A = spec.proto
        r = spec.r
        assert np.array_equal(np.asarray(cov.counts.sum(axis=0)).ravel(), np.repeat(A.sum(axis=0), r)
                              if spec.kind == "gcc1" else np.tile(A.sum(axis=0), r))
        assert np.array_equal(np.asarray(cov.counts.sum(axis=1)).ravel(), np.repeat(A.sum(axis=1), r)
                              if spec.kind == "gcc1" else np.tile(A.sum(axis=1), r))

    def test_random_explicit_degree_profile(self):
        rng = np.random.default_rng(5)
        A = rng.integers(0, 2, (2, 3))
        A[0, 0] = 1
        parts = tuple((p, Explicit(tuple(rng.permutation(5)))) for p in per_entry_decomposition(A))
        B = gcc2(CoverSpec(A, parts, "gcc2"))
        prof = degree_profile(B)
        base = degree_profile(SparseBinMatrix.from_dense(A))
        assert sorted(prof.col_degrees) == sorted(base.col_degrees * 5)
        assert sorted(prof.row_degrees) == sorted(base.row_degrees * 5)

    def test_parallel_edges_warn(self):
        A = np.array([[2, 1]])
        parts = ((np.array([[1, 0]]), Identity(2)), (np.array([[1, 1]]), Identity(2)))
        spec = CoverSpec(A, parts)
        with pytest.warns(ParallelEdgeWarning):
            cov = build_cover(spec)
        assert cov.has_parallel_edges
        assert cov.matrix.nnz == 4
        with pytest.warns(ParallelEdgeWarning):
            assert build_cover(spec, cancel=True).matrix.nnz == 2


class TestShuffle:
    def test_small_example(self):
        B = gcc1(small_spec("gcc1")).to_dense()
        Bbar = gcc2(small_spec("gcc2")).to_dense()
        rows, cols = shuffle_witness(2, 3, 7)
        assert np.array_equal(B[rows][:, cols], Bbar)

    @settings(max_examples=60)
    @given(random_specs())
    def test_witness_for_any_parts(self, spec):
        m, n = spec.proto.shape
        B = build_cover(spec.with_kind("gcc1")).counts.toarray()
        Bbar = build_cover(spec.with_kind("gcc2")).counts.toarray()
        rows, cols = shuffle_witness(m, n, spec.r)
        assert np.array_equal(B[rows][:, cols], Bbar)

    @settings(max_examples=25, deadline=None)
    @given(random_specs(max_r=4))
    def test_isomorphic_by_search(self, spec):
        if spec.proto.shape[1] * spec.r > 24:
            return
        B = build_cover(spec.with_kind("gcc1")).matrix
        Bbar = build_cover(spec.with_kind("gcc2")).matrix
        match = nx.algorithms.isomorphism.categorical_node_match("side", None)
        assert nx.is_isomorphic(tanner_graph(B), tanner_graph(Bbar), node_match=match)

    def test_cycle_spectra_agree(self):
        B = gcc1(small_spec("gcc1"))
        Bbar = gcc2(small_spec("gcc2"))
        g = girth(B)
        assert g == girth(Bbar)
        lengths = range(4, 2 * int(g) - 1, 2)
        assert count_cycles(B, lengths) == count_cycles(Bbar, lengths)


class TestValidateCover:
    def test_small_example(self):
        cov = build_cover(small_spec("gcc1"))
        assert validate_cover(ONES_2x3, cov.matrix, cov.var_proj, cov.chk_proj)
        cov2 = build_cover(small_spec("gcc2"))
        assert validate_cover(ONES_2x3, cov2.matrix, cov2.var_proj, cov2.chk_proj)

    def test_one_cover(self):
        H = codes.rate_half_10()
        assert validate_cover(H, H, np.arange(10), np.arange(5))

    def test_deleted_edge(self):
        cov = build_cover(small_spec("gcc1"))
        d = cov.matrix.to_dense()
        j, i = np.argwhere(d)[0]
        d[j, i] = 0
        assert not validate_cover(ONES_2x3, SparseBinMatrix.from_dense(d), cov.var_proj, cov.chk_proj)

    def test_not_surjective(self):
        with pytest.raises(ValueError):
            validate_cover(ONES_2x3, ONES_2x3, np.array([0, 0, 1]), np.array([0, 1]))

    @settings(max_examples=40)
    @given(random_specs())
    def test_every_construction_is_a_cover(self, spec):
        cov = build_cover(spec)
        assert validate_cover(spec.proto, cov.counts, cov.var_proj, cov.chk_proj)

    @settings(max_examples=40, deadline=None)
    @given(random_specs(max_r=5))
    def test_girth_never_decreases(self, spec):
        if spec.proto.max() == 0:
            return
        cov = build_cover(spec)
        assert girth(cov.matrix) >= girth(SparseBinMatrix.from_dense(spec.proto))


class TestDecomposition:
    def test_all_ones(self):
        parts = per_entry_decomposition(ONES_2x3)
        assert len(parts) == 6 and all(p.sum() == 1 for p in parts)
        assert np.array_equal(sum(parts), ONES_2x3)

    def test_zero(self):
        assert per_entry_decomposition(np.zeros((2, 2), dtype=int)) == []

    def test_entry_three(self):
        parts = per_entry_decomposition(np.array([[0, 3], [1, 0]]))
        assert [p.sum() for p in parts] == [3, 1]
        assert np.array_equal(sum(parts), np.array([[0, 3], [1, 0]]))


class TestPartsFile:
    def test_round_trip(self):
        spec = small_spec("gcc2")
        back = parse_parts(format_parts(spec))
        assert back.kind == "gcc2"
        assert gcc2(back) == gcc2(spec)

    def test_all_perm_kinds(self):
        A = np.array([[1, 1, 1, 1]])
        p = per_entry_decomposition(A)
        spec = CoverSpec(A, ((p[0], Identity(3)), (p[1], CirculantShift(2, 3)),
                             (p[2], Explicit((2, 0, 1))), (p[3], Identity(3))))
        assert format_parts(parse_parts(format_parts(spec))) == format_parts(spec)

    def test_malformed(self):
        with pytest.raises(ValueError):
            parse_parts("kind gcc1\nproto 1 2\n1 1\nid 2 0,0,1\n")
