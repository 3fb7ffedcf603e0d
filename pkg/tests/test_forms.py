import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hessweyl.errors import FormParseError
from hessweyl.forms import (FormSystem, HomogeneousForm, ZeroForm, evaluate, format_form, gamma_eval,
                            gamma_via_polarization, hessian_entry, parse_form, partial,
                            pencil_combine, permute_variables, restrict, symmetric_coeff,
                            variable_blocks)


@st.composite
def forms(draw, max_n=4, min_d=2, max_d=5, max_terms=5):
    n = draw(st.integers(1, max_n))
    d = draw(st.integers(min_d, max_d))
    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        cuts = sorted(draw(st.lists(st.integers(0, d), min_size=n - 1, max_size=n - 1)))
        e = tuple(b - a for a, b in zip([0] + cuts, cuts + [d]))
        terms[e] = draw(st.integers(-9, 9).filter(bool))
    return HomogeneousForm(n, d, terms)


def vec(n, lo=-6, hi=6):
    return st.lists(st.integers(lo, hi), min_size=n, max_size=n)


# ---------------------------------------------------------------- parsing

def test_parse_example():
    F = parse_form("x1^2*x2 - x3^3", 3)
    assert dict(F.items()) == {(2, 1, 0): 1, (0, 0, 3): -1}
    assert F.d == 3 and F.n == 3


def test_parse_collects_and_orders():
    F = parse_form(" 3 * x2*x1 + x1*x2 - 2x3^2 ", 3)
    assert dict(F.items()) == {(1, 1, 0): 4, (0, 0, 2): -2}
    assert format_form(F) == "4*x1*x2 - 2*x3^2"


@pytest.mark.parametrize("text,msg", [
    ("x1*x2 - x1*x2", "zero"),
    ("x1^2 + x2", "homogeneous"),
    ("x4^2", "range"),
    ("x1 +", None),
    ("2*x1", "degree"),
    ("x0^2", "range"),
])
def test_parse_errors(text, msg):
    with pytest.raises(FormParseError, match=msg):
        parse_form(text, 2 if text != "x4^2" else 3)


@given(forms())
def test_format_roundtrip(F):
    assert parse_form(format_form(F), F.n) == F


def test_invalid_construction():
    with pytest.raises(ValueError):
        HomogeneousForm(2, 2, {(1, 0): 1})
    with pytest.raises(ValueError):
        HomogeneousForm(2, 2, {(1, 1): 0})


# ---------------------------------------------------------------- evaluation

def test_evaluate_examples():
    assert evaluate(parse_form("x1^2*x2", 2), (3, 2)) == 18
    assert evaluate(parse_form("x1^2*x2^2 + x3^4", 3), (1, 1, 1)) == 2
    with pytest.raises(ValueError):
        evaluate(parse_form("x1^2", 2), (1,))


@given(forms())
def test_evaluate_zero(F):
    assert evaluate(F, [0] * F.n) == 0


def test_partial_examples():
    F = parse_form("x1^2*x2", 3)
    assert partial(F, 1) == parse_form("2*x1*x2", 3)
    assert isinstance(partial(F, 3), ZeroForm) and not partial(F, 3)
    G = parse_form("x1^5", 1)
    assert dict(partial(G, 1).items()) == {(4,): 5}
    with pytest.raises(IndexError):
        partial(F, 4)


def test_hessian_entry_examples():
    assert dict(hessian_entry(parse_form("x1*x2", 2), 1, 2).items()) == {(0, 0): 1}
    assert hessian_entry(parse_form("x1^2*x2^2", 2), 1, 1) == parse_form("2*x2^2", 2)
    # a1 x1^d x2^d has off-diagonal a1 d^2 x1^(d-1) x2^(d-1)
    for d, a in [(2, 3), (3, -2), (4, 5)]:
        F = HomogeneousForm(2, 2 * d, {(d, d): a})
        assert dict(hessian_entry(F, 1, 2).items()) == {(d - 1, d - 1): a * d * d}


@given(forms())
def test_hessian_symmetric(F):
    for a in range(1, F.n + 1):
        for b in range(1, F.n + 1):
            assert hessian_entry(F, a, b) == hessian_entry(F, b, a)


def test_symmetric_coeff_examples():
    assert symmetric_coeff(parse_form("x1*x2", 2), (1, 2)) == Fraction(1, 2)
    assert symmetric_coeff(parse_form("x1^2", 1), (1, 1)) == 1
    assert symmetric_coeff(parse_form("x1^2*x2", 2), (1, 1, 2)) == Fraction(1, 3)
    assert symmetric_coeff(parse_form("x1^2*x2", 2), (2, 1, 1)) == Fraction(1, 3)


@given(forms(max_n=3, max_d=4), st.data())
def test_symmetric_tensor_reconstructs_form(F, data):
    import itertools
    x = data.draw(vec(F.n))
    total = Fraction(0)
    for j in itertools.product(range(1, F.n + 1), repeat=F.d):
        total += symmetric_coeff(F, j) * math.prod(x[i - 1] for i in j)
    assert total == evaluate(F, x)
    for j in itertools.product(range(1, F.n + 1), repeat=F.d):
        assert (symmetric_coeff(F, j) * math.factorial(F.d)).denominator == 1


# ---------------------------------------------------------------- Gamma

def test_gamma_examples():
    F = parse_form("x1*x2", 2)
    assert gamma_eval(F, [(1, 0), (0, 1)]) == 1
    assert gamma_via_polarization(F, [(1, 0), (0, 1)]) == 1
    assert gamma_via_polarization(parse_form("x1^2", 1), [(1,), (1,)]) == 2
    assert gamma_eval(parse_form("x1^3", 1), [(2,), (3,), (1,)]) == 36
    with pytest.raises(ValueError):
        gamma_eval(F, [(1, 0)])


@settings(max_examples=60)
@given(forms(), st.data())
def test_gamma_properties(F, data):
    n, d = F.n, F.d
    xs = [data.draw(vec(n)) for _ in range(d)]
    g = gamma_eval(F, xs)
    assert g == gamma_via_polarization(F, xs)
    perm = data.draw(st.permutations(range(d)))
    assert gamma_eval(F, [xs[i] for i in perm]) == g
    x = xs[0]
    assert gamma_eval(F, [x] * d) == math.factorial(d) * evaluate(F, x)
    slot = data.draw(st.integers(0, d - 1))
    u, v = data.draw(vec(n)), data.draw(vec(n))
    t = data.draw(st.integers(-5, 5))
    comb = [a + t * b for a, b in zip(u, v)]

    def at(w):
        return gamma_eval(F, xs[:slot] + [w] + xs[slot + 1:])
    assert at(comb) == at(u) + t * at(v)


@settings(max_examples=60)
@given(forms(), st.data())
def test_second_derivative_identity(F, data):
    n, d = F.n, F.d
    x = data.draw(vec(n))
    for a in range(n):
        for b in range(n):
            ea = [int(i == a) for i in range(n)]
            eb = [int(i == b) for i in range(n)]
            lhs = d * (d - 1) * gamma_eval(F, [x] * (d - 2) + [ea, eb])
            assert lhs == math.factorial(d) * evaluate(hessian_entry(F, a + 1, b + 1), x)


# ---------------------------------------------------------------- systems

def test_pencil_examples():
    F = parse_form("x1^2 + 3*x1*x2", 2)
    assert pencil_combine(FormSystem.of(F), (1,)) == F
    assert not pencil_combine(FormSystem.of(F, F), (1, -1))
    S = FormSystem.of(parse_form("x1^2", 2), parse_form("x2^2", 2))
    assert pencil_combine(S, (2, 3)) == parse_form("2*x1^2 + 3*x2^2", 2)
    with pytest.raises(ValueError):
        pencil_combine(S, (1,))


def test_system_validation():
    with pytest.raises(ValueError):
        FormSystem.of(parse_form("x1^2", 2), parse_form("x1^3", 2))
    with pytest.raises(ValueError):
        FormSystem(())


def test_blocks_and_restrict():
    F = parse_form("x1^2*x3 + x2^3 + x4*x5^2", 5)
    assert variable_blocks([F], 5) == [(0, 2), (1,), (3, 4)]
    assert restrict(F, (0, 2)) == parse_form("x1^2*x2", 2)
    assert variable_blocks([parse_form("x1^2", 3)], 3) == [(0,), (1,), (2,)]


@given(forms(), st.data())
def test_permutation_evaluation(F, data):
    perm = data.draw(st.permutations(range(F.n)))
    G = permute_variables(F, perm)
    x = data.draw(vec(F.n))
    y = [0] * F.n
    for i, p in enumerate(perm):
        y[i] = x[p]
    assert evaluate(G, x) == evaluate(F, y)
