from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hgpprep import gf2
from hgpprep.gf2 import BudgetExceeded

from conftest import REP3


def binmat(max_rows=8, max_cols=10):
    shapes = st.tuples(st.integers(1, max_rows), st.integers(1, max_cols))
    return shapes.flatmap(lambda s: arrays(np.uint8, s, elements=st.integers(0, 1)))


def test_matvec_examples():
    assert gf2.matvec(gf2.identity(3), [1, 0, 1]).tolist() == [1, 0, 1]
    assert not gf2.matvec(gf2.zeros(4, 5), [1, 1, 0, 1, 1]).any()
    assert gf2.matvec(REP3, [1, 0, 0]).tolist() == [1, 0]


def test_matvec_dimension_mismatch():
    with pytest.raises(ValueError, match="3"):
        gf2.matvec(REP3, [1, 0, 0, 1])


def test_rank_examples():
    assert gf2.rank(gf2.identity(5)) == 5
    M = np.array([[1, 0, 1], [1, 0, 1], [0, 1, 1]], np.uint8)
    assert gf2.rank(M) == 2
    assert gf2.rank(gf2.zeros(3, 4)) == 0


def test_kernel_examples():
    assert gf2.kernel_basis(gf2.identity(4)).shape == (0, 4)
    assert gf2.kernel_basis(REP3).tolist() == [[1, 1, 1]]
    K = gf2.kernel_basis(gf2.zeros(2, 3))
    assert gf2.rank(K) == 3


def test_tensor_product_examples():
    A = np.array([[1, 0, 1], [0, 1, 1]], np.uint8)
    assert np.array_equal(gf2.tensor_product(A, gf2.identity(1)), A)
    assert np.array_equal(gf2.tensor_product(gf2.identity(2), gf2.identity(3)), gf2.identity(6))
    out = gf2.tensor_product([[1, 1]], gf2.identity(2))
    assert out.tolist() == [[1, 0, 1, 0], [0, 1, 0, 1]]


def test_tensor_product_index_convention():
    rng = np.random.default_rng(0)
    A = rng.integers(0, 2, (2, 3), dtype=np.uint8)
    B = rng.integers(0, 2, (3, 2), dtype=np.uint8)
    K = gf2.tensor_product(A, B)
    for i, k, j, l in np.ndindex(2, 3, 3, 2):
        assert K[i * 3 + k, j * 2 + l] == A[i, j] * B[k, l]


def test_block_compose_roundtrip():
    A = np.array([[1, 0], [1, 1]], np.uint8)
    B = np.array([[1, 1, 1]], np.uint8)
    M = gf2.block_compose([[A, None], [None, B]])
    assert M.shape == (3, 5)
    assert np.array_equal(gf2.block_extract(M, [2, 1], [2, 3], 0, 0), A)
    assert np.array_equal(gf2.block_extract(M, [2, 1], [2, 3], 1, 1), B)
    assert np.array_equal(gf2.block_compose([[A]]), A)


def test_block_compose_rejects_inconsistent_shapes():
    with pytest.raises(ValueError, match="rows"):
        gf2.block_compose([[np.ones((2, 2)), np.ones((3, 2))]])


def test_min_weight_coset_rep_examples():
    S = np.array([[1, 1, 0]], np.uint8)
    assert gf2.min_weight_coset_rep([0, 0, 0], S).weight == 0
    assert gf2.min_weight_coset_rep([1, 1, 0], S).weight == 0
    rep = gf2.min_weight_coset_rep([1, 1, 1], S)
    assert rep.vector.tolist() == [0, 0, 1] and rep.exact


def test_min_weight_coset_rep_lex_tie_break():
    # {100, 010} tie at weight 1; lexicographically smallest support is {0}
    rep = gf2.min_weight_coset_rep([1, 0, 0], [[1, 1, 0]])
    assert rep.vector.tolist() == [1, 0, 0]
    rep = gf2.min_weight_coset_rep([0, 1, 0], [[1, 1, 0]])
    assert rep.vector.tolist() == [1, 0, 0]


def test_min_weight_coset_rep_budget():
    S = gf2.identity(30)
    with pytest.raises(BudgetExceeded):
        gf2.min_weight_coset_rep(np.ones(30, np.uint8), S, budget=2**10)
    rep = gf2.min_weight_coset_rep(np.ones(30, np.uint8), S, exhaustive=False)
    assert not rep.exact and rep.weight == 0


def test_solve_and_image():
    s = np.array([1, 1], np.uint8)
    e = gf2.solve(REP3, s)
    assert gf2.matvec(REP3, e).tolist() == [1, 1]
    M = np.array([[1, 1], [1, 1]], np.uint8)
    assert gf2.solve(M, [1, 0]) is None
    assert not gf2.in_image(M, [1, 0])
    assert gf2.in_rowspace(REP3, [1, 0, 1])


def test_ball_search_finds_minimum():
    H = np.array([[1, 1, 0, 0, 0], [0, 1, 1, 0, 0], [0, 0, 1, 1, 0], [0, 0, 0, 1, 1]], np.uint8)
    e = gf2.ball_search(H, gf2.matvec(H, [1, 1, 0, 0, 0]), 3)
    assert gf2.weight(e) == 2


@settings(max_examples=60, deadline=None)
@given(binmat(), st.data())
def test_mixed_product(A, data):
    B = data.draw(binmat(4, 4))
    C = data.draw(arrays(np.uint8, (A.shape[1], data.draw(st.integers(1, 4))), elements=st.integers(0, 1)))
    D = data.draw(arrays(np.uint8, (B.shape[1], data.draw(st.integers(1, 4))), elements=st.integers(0, 1)))
    lhs = gf2.matmul(gf2.tensor_product(A, B), gf2.tensor_product(C, D))
    rhs = gf2.tensor_product(gf2.matmul(A, C), gf2.matmul(B, D))
    assert np.array_equal(lhs, rhs)


@settings(max_examples=100, deadline=None)
@given(binmat(12, 12))
def test_rank_transpose(M):
    assert gf2.rank(M) == gf2.rank(M.T)


@settings(max_examples=100, deadline=None)
@given(binmat(10, 14))
def test_kernel_properties(M):
    K = gf2.kernel_basis(M)
    assert K.shape == (M.shape[1] - gf2.rank(M), M.shape[1])
    assert not gf2.matmul(M, K.T).any()
    assert gf2.rank(K) == K.shape[0]


@settings(max_examples=100, deadline=None)
@given(binmat(), st.data())
def test_matvec_linear(M, data):
    vec = arrays(np.uint8, M.shape[1], elements=st.integers(0, 1))
    u, v = data.draw(vec), data.draw(vec)
    assert np.array_equal(gf2.matvec(M, u ^ v), gf2.matvec(M, u) ^ gf2.matvec(M, v))


@settings(max_examples=60, deadline=None)
@given(binmat(6, 12), st.data())
def test_coset_rep_properties(S, data):
    v = data.draw(arrays(np.uint8, S.shape[1], elements=st.integers(0, 1)))
    rep = gf2.min_weight_coset_rep(v, S)
    assert rep.weight <= gf2.weight(v)
    assert gf2.in_rowspace(S, rep.vector ^ v)


@settings(max_examples=60, deadline=None)
@given(binmat(8, 70))
def test_pack_roundtrip(M):
    assert np.array_equal(gf2.unpack_rows(gf2.pack_rows(M), M.shape[1]), M)
