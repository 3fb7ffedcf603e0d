import itertools

import pytest
from hypothesis import given, settings, strategies as st

from hessweyl.errors import BudgetExceeded
from hessweyl.forms import gamma_eval, parse_form, permute_variables, scale
from hessweyl.weyl import (fit_weyl_exponent, gamma_zero_count_naive, gamma_zero_count_quadratic,
                           gamma_zero_count_stratified, loglog_slope)

from test_forms import forms


def brute(F, B):
    # straight from the definition, one evaluation of Gamma per equation
    n, d = F.n, F.d
    box = list(itertools.product(range(-B, B + 1), repeat=n))
    basis = [[int(i == j) for j in range(n)] for i in range(n)]
    return sum(all(gamma_eval(F, list(xs) + [e]) == 0 for e in basis)
               for xs in itertools.product(box, repeat=d - 1))


def test_cube_counts_are_lattice_cross():
    F = parse_form("x1^3", 1)
    for B in range(1, 101):
        assert gamma_zero_count_stratified(F, B).count == 4 * B + 1
    assert [gamma_zero_count_naive(F, B) for B in (1, 2, 3)] == [5, 9, 13]


def test_rank_two_quadratic():
    F = parse_form("x1*x2", 2)
    assert [gamma_zero_count_naive(F, B) for B in (1, 3)] == [1, 1]
    assert gamma_zero_count_quadratic(F, 7) == 1


def test_stratified_breakdown():
    st5 = gamma_zero_count_stratified(parse_form("x1^3", 1), 5)
    assert st5.count == 21
    assert st5.outer_by_rank == {0: 1, 1: 10}
    assert st5.solutions_by_rank == {0: 11, 1: 10}


def test_two_cubes():
    F = parse_form("x1^3 + x2^3", 2)
    st3 = gamma_zero_count_stratified(F, 3)
    assert sum(st3.outer_by_rank.values()) == 49
    assert st3.count == gamma_zero_count_naive(F, 3) == brute(F, 3)


def test_naive_matches_definition():
    for text, n in [("x1^2*x2 - x2^3", 2), ("x1*x2*x3", 3), ("x1^4 - x1*x2^3", 2)]:
        F = parse_form(text, n)
        assert gamma_zero_count_naive(F, 1) == brute(F, 1)


@settings(max_examples=25, deadline=None)
@given(forms(max_n=2, min_d=3, max_d=4, max_terms=4), st.integers(1, 2))
def test_stratified_equals_naive(F, B):
    assert gamma_zero_count_stratified(F, B).count == gamma_zero_count_naive(F, B)


@settings(max_examples=25, deadline=None)
@given(forms(max_n=3, min_d=3, max_d=3, max_terms=4), st.data())
def test_count_invariances(F, data):
    B = 2
    base = gamma_zero_count_stratified(F, B).count
    perm = data.draw(st.permutations(range(F.n)))
    assert gamma_zero_count_stratified(permute_variables(F, perm), B).count == base
    assert gamma_zero_count_stratified(scale(F, -1), B).count == base


@settings(max_examples=30, deadline=None)
@given(forms(max_n=3, min_d=2, max_d=2), st.integers(0, 3))
def test_quadratic_kernel_route(F, B):
    assert gamma_zero_count_quadratic(F, B) == gamma_zero_count_naive(F, B)


@settings(max_examples=20, deadline=None)
@given(forms(max_n=2, min_d=3, max_d=3), st.integers(1, 3))
def test_counts_monotone_and_positive(F, B):
    a = gamma_zero_count_stratified(F, B).count
    b = gamma_zero_count_stratified(F, B + 1).count
    assert 1 <= a <= b


def test_budgets():
    F = parse_form("x1^3 + x2^3 + x3^3", 3)
    with pytest.raises(BudgetExceeded):
        gamma_zero_count_naive(F, 5, budget=1000)
    with pytest.raises(BudgetExceeded):
        gamma_zero_count_stratified(F, 20, budget=1000)
    with pytest.raises(ValueError):
        gamma_zero_count_stratified(parse_form("x1^2", 1), 2)


def test_fit_examples():
    rep = fit_weyl_exponent(parse_form("x1^3", 1), [4, 8, 16, 32])
    assert rep.counts == (17, 33, 65, 129)
    assert abs(rep.fitted_exponent - 1) < 0.15 and rep.predicted_exponent == 1
    rep = fit_weyl_exponent(parse_form("x1*x2", 2), [1, 2, 3])
    assert rep.fitted_exponent == 0.0 and rep.predicted_exponent == 0
    rep = fit_weyl_exponent(parse_form("x1^2*x2", 2), range(2, 11))
    assert rep.H_value == 0 and rep.predicted_exponent == 2
    assert rep.fitted_exponent <= rep.predicted_exponent + 0.5
    assert all(sum(b.values()) == (2 * B + 1) ** 2 for B, b in zip(rep.B_values, rep.breakdown))
    with pytest.raises(ValueError):
        fit_weyl_exponent(parse_form("x1^3", 1), [1, 2])


def test_loglog_slope():
    s, c = loglog_slope([1, 10, 100], [5, 50, 500])
    assert abs(s - 1) < 1e-12 and abs(c - 1.6094379124341003) < 1e-12
