import cmath
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hessweyl.circle import Box
from hessweyl.counting import (auto_split, count_zeros_box, count_zeros_split, fit_leading_term,
                               singular_integral, singular_series_term, truncated_singular_series)
from hessweyl.errors import BudgetExceeded
from hessweyl.forms import FormSystem, HomogeneousForm, evaluate, parse_form

SENARY = parse_form("x1^2 + x2^2 + x3^2 - x4^2 - x5^2 - x6^2", 6)


def brute_count(S, P, box=None):
    S = S if isinstance(S, FormSystem) else FormSystem.of(S)
    box = box or Box.symmetric(S.n)
    rng = [range(lo, hi + 1) for lo, hi in box.lattice_ranges(P)]
    return sum(all(evaluate(F, x) == 0 for F in S.forms) for x in itertools.product(*rng))


def brute_term(S, q):
    # q^{-n} times the complete character sum over primitive a, with complex phases
    S = S if isinstance(S, FormSystem) else FormSystem.of(S)
    total = 0j
    for a in itertools.product(range(q), repeat=S.R):
        if math.gcd(q, *a) != 1:
            continue
        for x in itertools.product(range(q), repeat=S.n):
            ph = sum(ai * evaluate(F, x) for ai, F in zip(a, S.forms)) % q
            total += cmath.exp(2j * math.pi * ph / q)
    return total / q**S.n


@st.composite
def diagonal_quadratics(draw, max_n=4):
    n = draw(st.integers(2, max_n))
    coeffs = draw(st.lists(st.integers(-3, 3).filter(bool), min_size=n, max_size=n))
    return HomogeneousForm(n, 2, {tuple(2 * int(i == j) for j in range(n)): c for i, c in enumerate(coeffs)})


# ---------------------------------------------------------------- counts

def test_count_examples():
    assert count_zeros_box(parse_form("x1^2 + x2^2", 2), 7) == 1
    assert count_zeros_box(parse_form("x1*x2", 2), 2) == 9
    assert count_zeros_box(parse_form("x1^2", 1), Fraction(1, 2), Box.parse("1/2:1", 1)) == 0


def test_split_examples():
    F = parse_form("x1^2 - x2^2", 2)
    assert count_zeros_split(F, 10) == count_zeros_box(F, 10) == 41
    assert count_zeros_split(SENARY, 6) == count_zeros_box(SENARY, 6)
    # independent oracle at P = 20: sum over v of r(v)^2, with r from a dense table of x1^2 + x2^2 + x3^2
    sq = np.arange(-20, 21) ** 2
    r = np.bincount((sq[:, None, None] + sq[None, :, None] + sq[None, None, :]).ravel())
    assert count_zeros_split(SENARY, 20) == int((r.astype(np.int64) ** 2).sum())
    assert count_zeros_split(parse_form("x1^2 + 2*x2^2 + x3^2", 3), 9) == 1
    with pytest.raises(ValueError):
        count_zeros_split(F, 5, (0,), (0, 1))


def test_auto_split_balances_blocks():
    a, b = auto_split(SENARY)
    assert sorted(a + b) == list(range(6)) and abs(len(a) - len(b)) <= 1


@settings(max_examples=30, deadline=None)
@given(diagonal_quadratics(), st.integers(1, 6))
def test_split_equals_box(F, P):
    assert count_zeros_split(F, P) == count_zeros_box(F, P) == brute_count(F, P)


@settings(max_examples=20, deadline=None)
@given(diagonal_quadratics(max_n=3), st.integers(1, 6), st.data())
def test_negating_a_variable(F, P, data):
    i = data.draw(st.integers(0, F.n - 1))
    G = HomogeneousForm(F.n, F.d, {e: c * (-1) ** e[i] for e, c in F.items()})
    assert count_zeros_box(G, P) == count_zeros_box(F, P)


def test_nested_boxes_monotone():
    F = parse_form("x1*x2 - x3^2", 3)
    inner = Box.parse("-1/2:1/2,0:1,-1:1/2", 3)
    assert count_zeros_box(F, 12, inner) <= count_zeros_box(F, 12)
    assert count_zeros_box(F, 12, inner) == brute_count(F, 12, inner)
    counts = [count_zeros_box(F, P) for P in range(1, 8)]
    assert counts == sorted(counts)


def test_system_count():
    S = FormSystem.of(parse_form("x1^2 - x2^2", 3), parse_form("x2^2 - x3^2", 3))
    assert count_zeros_box(S, 4) == brute_count(S, 4) == 1 + 8 * 4


def test_budget():
    with pytest.raises(BudgetExceeded):
        count_zeros_box(SENARY, 50, budget=10**6)


# ---------------------------------------------------------------- singular series

def test_series_terms_by_hand():
    assert singular_series_term(SENARY, 1) == 1
    # F = x1 + x2 + x3 + x4 mod 2, so the characters cancel
    assert singular_series_term(parse_form("x1^2 + x2^2 - x3^2 - x4^2", 4), 2) == 0
    # squares of quadratic Gauss sums mod 3 are -3
    assert singular_series_term(parse_form("x1^2 + x2^2", 2), 3) == Fraction(-2, 3)
    assert singular_series_term(parse_form("x1^2 + x2^2", 2), 4) == 0


@pytest.mark.parametrize("S,q", [
    (parse_form("x1^2 + x2^2 - 3*x3^2", 3), 6),
    (parse_form("x1^3 + 2*x2^3", 2), 9),
    (FormSystem.of(parse_form("x1^2 - x2^2", 3), parse_form("x1*x3", 3)), 4),
    (parse_form("x1*x2 - x3*x4", 4), 5),
])
def test_series_terms_match_character_sums(S, q):
    exact = singular_series_term(S, q)
    assert abs(float(exact) - brute_term(S, q)) < 1e-9


def test_truncated_series():
    ser = truncated_singular_series(SENARY, 1)
    assert ser.value == 1.0
    ser = truncated_singular_series(SENARY, 50)
    assert ser.stable and ser.value == pytest.approx(1.5395, abs=1e-3)
    # x1^2 + x2^2 = 3 x3^2 has only the trivial 3-adic solution
    obs = truncated_singular_series(parse_form("x1^2 + x2^2 - 3*x3^2", 3), 40, tol=0.5)
    assert obs.partial_sums[-1] < obs.partial_sums[0]


# ---------------------------------------------------------------- singular integral

def test_singular_integral_cone():
    # the density of x1^2 + x2^2 = x3^2 in the unit cube is 2*pi
    J = singular_integral(parse_form("x1^2 + x2^2 - x3^2", 3), samples=16_000_000, seed=0)
    assert J.converged
    assert abs(J.value - 2 * math.pi) / (2 * math.pi) < 0.02


def test_singular_integral_definite():
    J = singular_integral(parse_form("x1^2 + x2^2 + x3^2", 3), eps_list=(0.04, 0.02, 0.01),
                          samples=1_000_000)
    assert list(J.estimates) == sorted(J.estimates, reverse=True)
    assert J.value < 0.2


def test_singular_integral_halving_consistent():
    F = parse_form("x1^2 + x2^2 - x3^2 - x4^2", 4)
    J = singular_integral(F, eps_list=(0.02, 0.01), samples=1_000_000, seed=1)
    assert abs(J.estimates[0] - J.estimates[1]) < 0.05 * J.value + 3 * max(J.estimate_errors)


def test_singular_integral_seed_determinism():
    F = parse_form("x1^2 + x2^2 - x3^2", 3)
    a = singular_integral(F, samples=200_000, seed=9)
    b = singular_integral(F, samples=200_000, seed=9)
    assert a.value == b.value
    assert not singular_integral(parse_form("x1^2 - x2^2", 2), samples=100_000).converged


# ---------------------------------------------------------------- fits

def test_fit_examples():
    fit = fit_leading_term(parse_form("x1*x2 - x3*x4", 4), [16, 24, 32, 48, 64])
    assert abs(fit.fitted_exponent - 2) < 0.3
    assert fit.counts[0] == brute_count(parse_form("x1*x2 - x3*x4", 4), 16)
    fit = fit_leading_term(parse_form("x1^2 + x2^2", 2), [2, 4, 6, 8])
    assert fit.degenerate and fit.fitted_exponent == 0.0 and fit.counts == (1, 1, 1, 1)
    with pytest.raises(ValueError):
        fit_leading_term(SENARY, [4, 8, 12])
