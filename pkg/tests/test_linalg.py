import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from axongrowth.linalg import balance, mat_exp
from axongrowth.verify import series_expm


def _mp_expm(M):
    with mp.workdps(40):
        E = mp.expm(mp.matrix(M.tolist()))
        return np.array([[float(E[i, j]) for j in range(M.shape[1])] for i in range(M.shape[0])])


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_zero_and_diagonal():
    np.testing.assert_array_equal(mat_exp(np.zeros((4, 4))), np.eye(4))
    d = np.array([-3.0, 0.5, 2.0, 7.5])
    np.testing.assert_allclose(mat_exp(np.diag(d)), np.diag(np.exp(d)), rtol=1e-14)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        mat_exp(np.ones((2, 3)))
    with pytest.raises(ValueError):
        mat_exp(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_random_against_series_oracle():
    rng = np.random.default_rng(1234)
    for _ in range(50):
        M = rng.normal(size=(4, 4))
        M *= rng.uniform(0.0, 10.0) / np.linalg.norm(M, 2)
        assert _rel(mat_exp(M), series_expm(M)) <= 1e-10


@pytest.mark.parametrize("scale", [0.01, 0.2, 0.9, 2.0, 5.0, 10.0])
def test_each_pade_branch_against_mpmath(scale):
    # scales straddle every degree threshold of the algorithm
    rng = np.random.default_rng(int(scale * 100))
    M = rng.normal(size=(4, 4))
    M *= scale / np.abs(M).sum(axis=0).max()
    assert _rel(mat_exp(M), _mp_expm(M)) <= 1e-12


def test_nilpotent_exact():
    N = np.diag([1.0, 2.0, 3.0], k=1)
    expected = np.eye(4) + N + N @ N / 2 + N @ N @ N / 6
    np.testing.assert_allclose(mat_exp(N), expected, rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(
    M=arrays(np.float64, (4, 4), elements=st.floats(-2.0, 2.0)),
    s=st.floats(0.0, 1.0),
    t=st.floats(0.0, 1.0),
)
def test_semigroup(M, s, t):
    lhs = mat_exp(M * (s + t))
    rhs = mat_exp(M * s) @ mat_exp(M * t)
    assert _rel(rhs, lhs) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(M=arrays(np.float64, (3, 3), elements=st.floats(-3.0, 3.0)))
def test_inverse(M):
    np.testing.assert_allclose(mat_exp(M) @ mat_exp(-M), np.eye(3), atol=1e-9)


def test_balance_is_similarity():
    rng = np.random.default_rng(7)
    T = np.diag([1.0, 1e3, 1e-4, 1e6])
    M = np.linalg.inv(T) @ rng.normal(size=(4, 4)) @ T
    Mb, t = balance(M)
    np.testing.assert_allclose(np.diag(1 / t) @ M @ np.diag(t), Mb, rtol=1e-12, atol=1e-12 * np.abs(Mb).max())
    E = np.diag(t) @ mat_exp(0.3 * Mb) @ np.diag(1 / t)
    assert _rel(E, _mp_expm(0.3 * M)) <= 1e-10
