from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cluspr.corpus import CentralIndex
from cluspr.errors import DataError
from cluspr.matrices import (
    build_A,
    build_bundle,
    build_Q,
    build_R,
    estimate_k,
    normalize,
    trim_tokens,
)
from oracles import exact_pipeline
from synthetic import index_from_matrix, random_index

# Full-precision trace of the untrimmed worked example, from exact_pipeline().
TABLE_A_TRACE = Fraction(3279257905696431752209, 1502137072877578407270)


def test_exact_oracle_trace_is_frozen():
    from conftest import TABLE_A

    *_, Q = exact_pipeline(TABLE_A)
    assert sum(Q[i][i] for i in range(5)) == TABLE_A_TRACE
    assert float(TABLE_A_TRACE) == pytest.approx(2.1831, abs=1e-4)


def test_trim_rule():
    idx = CentralIndex({"a": {"1": 1, "2": 1, "3": 1, "4": 1}, "b": {"1": 1, "2": 1}}, ("1", "2", "3", "4"))
    assert trim_tokens(idx) == ["a"]
    same = CentralIndex({"b": {"1": 1}, "a": {"2": 1}}, ("1", "2"))
    assert trim_tokens(same) == ["a", "b"]
    with pytest.raises(DataError):
        trim_tokens(CentralIndex())


def test_trim_table_a(table_a):
    # doc counts 4,3,2,4,4 -> mean 3.4 keeps book, net, enter
    index, keymap, _ = table_a
    assert sorted(keymap[t] for t in trim_tokens(index)) == ["book", "enter", "net"]


def test_build_A_and_normalize_small():
    idx = CentralIndex({"t": {"d": 7}}, ("d",))
    A = build_A(idx, ["t"])
    assert A.tolist() == [[7]]
    assert normalize(A).tolist() == [[1.0]]
    assert build_R(np.array([[1.0]])).tolist() == [[1.0]]
    assert build_Q(np.array([[1.0]]), np.array([[1.0]])).tolist() == [[1.0]]


def test_absent_token_gives_zero(table_a):
    index, _, tok = table_a
    A = build_A(index, [tok["traffic"]])
    assert A[0, 0] == 0 and A[0, 1] == 23


def test_normalize_zero_column():
    N = normalize(np.array([[0, 2], [0, 1]]))
    assert N.tolist() == [[0.0, 1.0], [0.0, 0.5]]


def test_worked_example_rows(table_a):
    index, _, tok = table_a
    b = build_bundle(index, trim=False)
    row = b.token_row
    np.testing.assert_array_equal(b.A[row(tok["book"])], [30, 0, 23, 4, 40, 0])
    np.testing.assert_allclose(b.N[row(tok["book"])], [0.58, 0, 0.34, 0.07, 1, 0], atol=0.005)
    np.testing.assert_allclose(b.R[row(tok["book"])], [0.29, 0, 0.17, 0.04, 0.50, 0], atol=0.01)
    np.testing.assert_allclose(b.R[row(tok["solve"])], [0.05, 0, 0, 0.51, 0.43, 0], atol=0.01)
    order = [row(tok[t]) for t in ("book", "solve", "traffic", "net", "enter")]
    np.testing.assert_allclose(b.S[0, order], [0.34, 0.06, 0, 0.60, 0], atol=0.01)
    np.testing.assert_allclose(b.S[4, order], [0.52, 0.44, 0, 0, 0.04], atol=0.01)
    # d3 row by hand: N column (23/68, 1) normalizes to (23/91, 68/91)
    np.testing.assert_allclose(b.S[2, order], [23 / 91, 0, 0, 0, 68 / 91], atol=1e-12)


def test_nonzero_columns_hold_a_one():
    rng = np.random.default_rng(3)
    for _ in range(20):
        idx = random_index(rng, 6, 5)
        N = build_bundle(idx, trim=False).N
        for j in range(N.shape[1]):
            if N[:, j].any():
                assert N[:, j].max() == 1.0


def test_build_R_zero_row():
    with pytest.raises(DataError):
        build_R(np.array([[0.0, 0.0], [1.0, 0.0]]))


def test_build_Q_dimension_mismatch():
    with pytest.raises(ValueError):
        build_Q(np.ones((2, 3)), np.ones((2, 2)))


def test_q_from_rounded_tables():
    """The printed R and S tables reproduce the printed Q diagonal."""
    R = np.array(
        [
            [0.29, 0, 0.17, 0.04, 0.50, 0],
            [0.05, 0, 0, 0.51, 0.43, 0],
            [0, 0.48, 0, 0.52, 0, 0],
            [0.29, 0.29, 0, 0.11, 0, 0.29],
            [0, 0.42, 0.45, 0, 0.03, 0.09],
        ]
    )
    S = np.array(
        [
            [0.34, 0.06, 0, 0.60, 0],
            [0, 0, 0.19, 0.49, 0.38],
            [0.17, 0, 0, 0, 0.45],
            [0.04, 0.51, 0.25, 0.19, 0],
            [0.52, 0.44, 0, 0, 0.04],
            [0, 0, 0, 0.84, 0.16],
        ]
    )
    Q = build_Q(R, S)
    assert Q[0, 0] == pytest.approx(0.39, abs=0.01)
    assert Q[1, 1] == pytest.approx(0.45, abs=0.01)


def test_estimate_k():
    diag = np.diag([0.39, 0.45, 0.21, 0.58, 0.37])
    est = estimate_k(diag)
    assert est.trace == pytest.approx(2.00) and est.k == 2
    assert estimate_k(np.eye(4)).k == 4
    assert estimate_k(np.array([[0.01]])).k == 1


def test_full_precision_table_a(table_a):
    index, _, _ = table_a
    b = build_bundle(index, trim=False)
    est = estimate_k(b.Q)
    assert est.trace == pytest.approx(float(TABLE_A_TRACE), abs=1e-12)
    assert est.k == 3


def test_matches_exact_oracle_on_random_matrices():
    rng = np.random.default_rng(11)
    for _ in range(25):
        idx = random_index(rng, int(rng.integers(2, 8)), int(rng.integers(2, 7)))
        b = build_bundle(idx, trim=False)
        N, R, S, Q = exact_pipeline(b.A.tolist())
        np.testing.assert_allclose(b.N, np.array(N, dtype=float), atol=1e-12)
        np.testing.assert_allclose(b.R, np.array(R, dtype=float), atol=1e-12)
        np.testing.assert_allclose(b.S, np.array(S, dtype=float), atol=1e-12)
        np.testing.assert_allclose(b.Q, np.array(Q, dtype=float), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 15), st.integers(3, 12))
def test_stochastic_properties(seed, m, n):
    b = build_bundle(random_index(np.random.default_rng(seed), m, n), trim=False)
    np.testing.assert_allclose(b.R.sum(axis=1), 1.0, atol=1e-9)
    content = b.N.sum(axis=0) > 0
    np.testing.assert_allclose(b.S[content].sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_allclose(b.Q.sum(axis=1), 1.0, atol=1e-9)
    assert (b.Q >= 0).all() and (b.Q <= 1 + 1e-12).all()
    est = estimate_k(b.Q)
    assert 0 < est.trace <= m + 1e-9
    assert 1 <= est.k <= m


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_token_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(0, 6, size=(5, 4))
    A[:, 0] += 1  # no empty rows
    perm = rng.permutation(5)
    b1 = build_bundle(index_from_matrix(A), trim=False)
    b2 = build_bundle(index_from_matrix(A[perm]), trim=False)
    # bundles reorder tokens by doc count; compare by token label
    names1 = {t: i for i, t in enumerate(b1.tokens)}
    labels2 = [f"t{perm[i]:02d}" for i in range(5)]
    names2 = {labels2[int(t[1:])]: i for i, t in enumerate(b2.tokens)}
    for a in names1:
        for c in names1:
            assert b1.Q[names1[a], names1[c]] == pytest.approx(b2.Q[names2[a], names2[c]], abs=1e-12)
    e1, e2 = estimate_k(b1.Q), estimate_k(b2.Q)
    assert e1.trace == pytest.approx(e2.trace, abs=1e-12) and e1.k == e2.k
