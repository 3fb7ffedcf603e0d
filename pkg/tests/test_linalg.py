import itertools

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from hessweyl.linalg import (IntegerMatrix, adjugate, count_kernel_points_in_box, determinant,
                             enumerate_lattice_box, is_prime, kernel_basis, rank_mod_p,
                             rank_rational, round_half_even)


def M(rows):
    return IntegerMatrix.from_rows(rows)


@st.composite
def matrices(draw, max_rows=5, max_cols=5, lo=-6, hi=6, square=False):
    r = draw(st.integers(1, max_rows))
    c = r if square else draw(st.integers(1, max_cols))
    # low-rank products show up often enough to exercise kernels
    if draw(st.booleans()):
        k = draw(st.integers(1, min(r, c)))
        A = draw(st.lists(st.lists(st.integers(-3, 3), min_size=k, max_size=k), min_size=r, max_size=r))
        Bm = draw(st.lists(st.lists(st.integers(-3, 3), min_size=c, max_size=c), min_size=k, max_size=k))
        rows = [[sum(A[i][t] * Bm[t][j] for t in range(k)) for j in range(c)] for i in range(r)]
    else:
        rows = draw(st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c), min_size=r, max_size=r))
    return M(rows)


def test_rank_examples():
    assert rank_rational(M([[0, 1], [1, 0]])) == 2
    assert rank_rational(IntegerMatrix.zeros(3, 3)) == 0
    assert rank_rational(M([[2, 4], [1, 2]])) == 1


def test_rank_mod_p_examples():
    assert rank_mod_p(M([[2, 0], [0, 2]]), 2) == 0
    assert rank_mod_p(M([[2, 0], [0, 2]]), 5) == 2
    with pytest.raises(ValueError):
        rank_mod_p(M([[1]]), 4)


@given(matrices())
def test_rank_matches_sympy(A):
    assert rank_rational(A) == sympy.Matrix(A.tolist()).rank()


@given(matrices(), st.sampled_from([2, 3, 5, 7, 101]))
def test_rank_mod_p_bounded(A, p):
    assert rank_mod_p(A, p) <= rank_rational(A)


@given(matrices())
def test_rank_mod_large_prime(A):
    # a prime above Hadamard's bound divides no nonzero minor
    bound = 1
    for row in A.tolist():
        bound *= max(1, sum(v * v for v in row))
    p = int(sympy.nextprime(int(bound**0.5) + 2))
    assert rank_mod_p(A, p) == rank_rational(A)


@given(matrices(max_rows=6, square=True))
def test_determinant_matches_sympy(A):
    assert determinant(A) == sympy.Matrix(A.tolist()).det()


def test_adjugate_examples():
    I2 = IntegerMatrix.identity(2)
    assert adjugate(I2) == I2
    A = M([[1, 2], [3, 4]])
    C = adjugate(A)
    assert (A @ C.T).tolist() == [[-2, 0], [0, -2]]
    S = M([[1, 1], [1, 1]])
    assert (S @ adjugate(S).T).tolist() == [[0, 0], [0, 0]]


@settings(max_examples=60)
@given(matrices(max_rows=6, square=True))
def test_adjugate_contract(A):
    C = adjugate(A)
    det = determinant(A)
    n = A.rows
    target = [[det * int(i == j) for j in range(n)] for i in range(n)]
    assert (A @ C.T).tolist() == target
    assert (C @ A.T).tolist() == target


def test_kernel_examples():
    assert kernel_basis(IntegerMatrix.zeros(1, 2)).dim == 2
    assert kernel_basis(IntegerMatrix.identity(2)).dim == 0
    kb = kernel_basis(M([[1, 2]]))
    assert kb.vectors in (((2, -1),), ((-2, 1),))


def _is_saturated(vecs, n):
    # the basis is saturated iff the gcd of its maximal minors is 1
    if not vecs:
        return True
    k = len(vecs)
    g = 0
    for cols in itertools.combinations(range(n), k):
        g = sympy.gcd(g, sympy.Matrix([[v[c] for c in cols] for v in vecs]).det())
    return g == 1


@given(matrices())
def test_kernel_basis_properties(A):
    kb = kernel_basis(A)
    assert kb.dim == A.cols - rank_rational(A)
    for v in kb.vectors:
        assert A.apply(v) == [0] * A.rows
    if kb.dim:
        assert sympy.Matrix(kb.vectors).rank() == kb.dim
    assert _is_saturated(kb.vectors, A.cols)


def test_count_kernel_examples():
    assert count_kernel_points_in_box(IntegerMatrix.identity(3), 5) == 1
    assert count_kernel_points_in_box(IntegerMatrix.zeros(2, 3), 2) == 125
    assert count_kernel_points_in_box(M([[1, -1]]), 3) == 7


@given(matrices(max_rows=3, max_cols=4, lo=-3, hi=3), st.integers(0, 4))
def test_count_kernel_bruteforce(A, B):
    brute = sum(1 for y in itertools.product(range(-B, B + 1), repeat=A.cols)
                if all(v == 0 for v in A.apply(y)))
    assert count_kernel_points_in_box(A, B) == brute


def test_enumeration_yields_distinct_points():
    pts = list(enumerate_lattice_box([(1, 1, 0), (0, 2, 1)], 3))
    assert len(pts) == len(set(pts))
    brute = {(a, a + 2 * b, b) for a in range(-3, 4) for b in range(-3, 4)
             if abs(a + 2 * b) <= 3}
    assert set(pts) == brute


def test_round_half_even():
    assert [round_half_even(k, 2) for k in (-3, -1, 1, 3, 5)] == [-2, 0, 0, 2, 2]
    assert round_half_even(7, 3) == 2 and round_half_even(-7, 3) == -2


def test_is_prime():
    assert [p for p in range(60) if is_prime(p)] == list(sympy.primerange(0, 60))
    assert is_prime(2**61 - 1) and not is_prime(2**61 + 1)
