import itertools

import pytest
from hypothesis import given, settings, strategies as st

from hessweyl.errors import BadPrimeError
from hessweyl.forms import FormSystem, HomogeneousForm, evaluate, gradient, parse_form, permute_variables, scale
from hessweyl.linalg import IntegerMatrix, rank_mod_p, rank_rational
from hessweyl.strata import (estimate_stratum_dim, fit_dimension, hessian_at, hessian_invariant,
                             hessian_rank_at, pencil_sigma, rank_histogram_mod_p,
                             singular_locus_count_mod_p, singular_locus_dim, strata_invariant,
                             stratum_count_mod_p)

from test_forms import forms


def brute_hist(F, p):
    hist = [0] * (F.n + 1)
    for x in itertools.product(range(p), repeat=F.n):
        hist[rank_mod_p(hessian_at(F, x), p)] += 1
    return hist


def brute_singular(S, p):
    cnt = 0
    for x in itertools.product(range(p), repeat=S.n):
        J = IntegerMatrix.from_rows([[evaluate(g, x) for g in gradient(F)] for F in S.forms], S.n)
        cnt += rank_mod_p(J, p) < S.R
    return cnt


def test_rank_at_examples():
    assert hessian_rank_at(parse_form("x1^2 + x2^2", 2), (5, -3)) == 2
    assert hessian_rank_at(parse_form("x1^2*x2^2 + x3^4", 3), (1, 1, 1)) == 3
    assert hessian_rank_at(parse_form("x1^3 + x1*x2*x3", 3), (0, 0, 0)) == 0


def test_stratum_count_examples():
    F = parse_form("x1^2*x2^2 + x3^4", 3)
    assert stratum_count_mod_p(F, 3, 5) == 125
    assert stratum_count_mod_p(parse_form("x1^3", 1), 0, 5) == 1
    cnt = stratum_count_mod_p(F, 2, 5)
    assert cnt == sum(brute_hist(F, 5)[:3])


@settings(max_examples=40, deadline=None)
@given(forms(max_n=3, min_d=3, max_d=4), st.sampled_from([5, 7]))
def test_histogram_matches_bruteforce(F, p):
    try:
        hist = rank_histogram_mod_p(F, p)
    except BadPrimeError:
        return
    assert list(hist) == brute_hist(F, p)


def test_block_structure_counts():
    # several blocks and a free variable exercise the convolution path
    F = parse_form("x1^2*x2 + 2*x3^3 - x3*x4^2", 5)
    assert list(rank_histogram_mod_p(F, 7)) == brute_hist(F, 7)


def test_bad_primes_rejected():
    F = parse_form("x1^3 + x2^3", 2)
    with pytest.raises(BadPrimeError):
        stratum_count_mod_p(F, 1, 3)
    with pytest.raises(BadPrimeError):
        stratum_count_mod_p(F, 1, 9)
    with pytest.raises(BadPrimeError):
        stratum_count_mod_p(parse_form("7*x1^3", 1), 0, 7)


def test_stratum_monotone():
    F = parse_form("x1^3 + 2*x2^3 - x1*x2*x3 + x3^3", 3)
    counts = [stratum_count_mod_p(F, r, 101) for r in range(4)]
    assert counts == sorted(counts) and counts[-1] == 101**3


def test_estimate_examples():
    F = parse_form("x1^2*x2^2 + x3^4", 3)
    est = estimate_stratum_dim(F, 3, (101, 211))
    assert est.dim == 3 and est.agreement
    assert estimate_stratum_dim(parse_form("x1^3", 1), 0, (101, 211)).dim == 0
    assert estimate_stratum_dim(F, 1, (101, 211, 401)).dim <= 1
    with pytest.raises(ValueError):
        estimate_stratum_dim(F, 1, (101,))


def test_fit_dimension_conventions():
    assert fit_dimension([(101, 0), (211, 0)], 3).empty
    est = fit_dimension([(101, 101**2), (211, 211**2 + 5)], 3)
    assert est.dim == 2 and est.agreement
    est = fit_dimension([(5, 6), (7, 1), (11, 1)], 2)
    assert est.dim == 0 and not est.agreement


def test_invariant_examples():
    assert hessian_invariant(parse_form("x1^2 + x2^2", 2)).value == 0
    rep = hessian_invariant(parse_form("x1^2", 2))
    assert rep.value == 1 and rep.method == "exact-quadratic"
    rep = hessian_invariant(parse_form("4*x1*x2^3 - x1^4", 2))
    assert rep.value == 0 and rep.agreement and rep.method == "modp-estimate"


@settings(max_examples=30, deadline=None)
@given(forms(max_n=4, min_d=2, max_d=2))
def test_quadratic_cross_check(F):
    H = hessian_invariant(F)
    assert H.value == F.n - rank_rational(IntegerMatrix.from_rows(
        [[hessian_at(F, [0] * F.n)[a, b] for b in range(F.n)] for a in range(F.n)]))
    try:
        pipeline = strata_invariant(F)
    except BadPrimeError:
        return
    assert pipeline.value == H.value


def test_invariance_under_scaling_and_permutation():
    F = parse_form("x1^2*x2 + x3^3 - x1*x2*x3", 3)
    base = hessian_invariant(F).value
    assert hessian_invariant(scale(F, -3)).value == base
    assert hessian_invariant(permute_variables(F, (2, 0, 1))).value == base


def test_stratum_dims_nondecreasing():
    F = parse_form("x1^2*x2^2 + x3^2*x4^2 + x5^4", 5)
    dims = hessian_invariant(F).stratum_dims()
    assert dims == sorted(dims)


def test_singular_locus_examples():
    assert singular_locus_dim(parse_form("x1^2 + x2^2 + x3^2", 3)).dim == 0
    est = singular_locus_dim(parse_form("x1^2*x2^2 + x3^4", 3))
    assert est.dim == 1 and est.agreement
    # x1 = x3 = 0 or x2 = x3 = 0: two lines through the origin
    assert [c for _, c in est.counts] == [2 * p - 1 for p in (101, 211, 401)]


def test_example2_gradient_vanishes_only_at_origin():
    F = parse_form("4*x1*x2^3 - x1^4", 2)
    for p in (5, 7, 101):
        assert singular_locus_count_mod_p(F, p) == brute_singular(FormSystem.of(F), p) == 1
    assert singular_locus_dim(F).dim == 0


@settings(max_examples=25, deadline=None)
@given(forms(max_n=3, min_d=3, max_d=4))
def test_singular_count_matches_bruteforce(F):
    try:
        assert singular_locus_count_mod_p(F, 7) == brute_singular(FormSystem.of(F), 7)
    except BadPrimeError:
        pass


def test_system_singular_count():
    S = FormSystem.of(parse_form("x1^3 + x2^3 + x3^3", 3), parse_form("x1*x2*x3", 3))
    assert singular_locus_count_mod_p(S, 7) == brute_singular(S, 7)


def test_pencil_examples():
    F = parse_form("x1^2*x2^2 + x3^4", 3)
    assert pencil_sigma(F).sigma == hessian_invariant(F).value
    rep = pencil_sigma(FormSystem.of(parse_form("x1^2 + x2^2", 2), parse_form("x1^2 - x2^2", 2)), c_radius=1)
    assert rep.sigma == 1 and rep.c in ((1, 1), (1, -1))
    assert {c for c, _ in rep.evaluated} == {(0, 1), (1, -1), (1, 0), (1, 1)}
    rep = pencil_sigma(FormSystem.of(parse_form("x1^2", 2), parse_form("x2^2", 2)), c_radius=2)
    assert rep.sigma == 1 and rep.c in ((1, 0), (0, 1))


def test_pencil_monotone_in_radius():
    S = FormSystem.of(parse_form("x1^2 + 2*x2^2 + x3^2", 3), parse_form("x1^2 + x2^2 - x3^2", 3))
    vals = [pencil_sigma(S, c_radius=r).sigma for r in (1, 2, 3)]
    assert vals == sorted(vals)
    # c = (1, -1) gives x2^2 + 2*x3^2, of corank 1
    assert vals[-1] >= 1


def test_pencil_skips_zero_combinations():
    F = parse_form("x1^2 + x2^2", 2)
    rep = pencil_sigma(FormSystem.of(F, F), c_radius=1)
    assert all(c != (1, -1) for c, _ in rep.evaluated)


def test_zero_form_shape():
    # a quadratic in one block with a free variable has corank counted correctly
    F = HomogeneousForm(3, 2, {(1, 1, 0): 1})
    assert hessian_invariant(F).value == 1
