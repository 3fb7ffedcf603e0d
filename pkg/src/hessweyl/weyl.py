"""Counting zeros of the Weyl-differenced multilinear system.

The quantity counted is

    #{(x_1, ..., x_{d-1}) in [-B, B]^{n(d-1)} : Gamma_G(x_1, ..., x_{d-1}, e_i) = 0 for all i}

either by scanning every tuple or by fixing the first ``d - 2`` vectors,
forming the n x n matrix ``[Gamma_G(x_1, ..., x_{d-2}, e_a, e_b)]`` and
counting its integer kernel in the box.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import BudgetExceeded
from .forms import HomogeneousForm, gradient, hessian_entry
from .linalg import IntegerMatrix, count_kernel_points_in_box, rank_rational
from .strata import DEFAULT_PRIMES, hessian_constant_matrix, hessian_invariant

DEFAULT_NAIVE_BUDGET = 10**7
DEFAULT_OUTER_BUDGET = 10**7


def _multilinear_value(form, xs) -> int:
    if not form:
        return 0
    total = 0
    for coef, order in form.multilinear_terms:
        term = coef
        for slot, v in enumerate(order):
            term *= xs[slot][v]
        total += term
    return total


def gamma_zero_count_naive(F: HomogeneousForm, B: int, budget: int = DEFAULT_NAIVE_BUDGET) -> int:
    """Scan all (d-1)-tuples; Gamma_G(., e_i) is Gamma of the i-th partial."""
    n, k = F.n, F.d - 1
    total = (2 * B + 1) ** (n * k)
    if total > budget:
        raise BudgetExceeded("naive Weyl count", total, budget)
    eqs = gradient(F)
    if K.fits_int64(K.multilinear_bound(eqs, B)):
        coef, var, offs = K.pack_multilinear(eqs, k)
        return int(K.count_zero_tuples(coef, var, offs, k, n, B))
    count = 0
    rng = range(-B, B + 1)
    for flat in itertools.product(rng, repeat=n * k):
        xs = [flat[s * n:(s + 1) * n] for s in range(k)]
        if all(_multilinear_value(g, xs) == 0 for g in eqs):
            count += 1
    return count


@dataclass(frozen=True)
class StratifiedCount:
    count: int
    outer_by_rank: dict[int, int]
    solutions_by_rank: dict[int, int]


def _normalise_rows(vals: np.ndarray) -> np.ndarray:
    g = np.gcd.reduce(np.abs(vals), axis=1)
    g[g == 0] = 1
    out = vals // g[:, None]
    first = np.argmax(out != 0, axis=1)
    sign = np.sign(out[np.arange(out.shape[0]), first])
    sign[sign == 0] = 1
    return out * sign[:, None]


def gamma_zero_count_stratified(F: HomogeneousForm, B: int,
                                budget: int = DEFAULT_OUTER_BUDGET) -> StratifiedCount:
    """Outer sum over (x_1..x_{d-2}), inner kernel count of the Gamma-matrix.

    The kernel count of a matrix does not change under scaling, so outer
    tuples are grouped by their primitive, sign-normalised matrix and each
    distinct matrix is solved once.
    """
    n, d = F.n, F.d
    if d < 3:
        raise ValueError("the stratified count needs d >= 3")
    k = d - 2
    outer = (2 * B + 1) ** (n * k)
    if outer > budget:
        raise BudgetExceeded("stratified Weyl count (outer tuples)", outer, budget)
    pairs = [(a, b) for a in range(n) for b in range(a, n)]
    entries = [hessian_entry(F, a + 1, b + 1) for a, b in pairs]
    cache: dict[tuple[int, ...], tuple[int, int]] = {}
    by_rank: dict[int, int] = {}
    sol_by_rank: dict[int, int] = {}

    def solve(key: tuple[int, ...]) -> tuple[int, int]:
        hit = cache.get(key)
        if hit is None:
            rows = [[0] * n for _ in range(n)]
            for (a, b), v in zip(pairs, key):
                rows[a][b] = rows[b][a] = int(v)
            M = IntegerMatrix.from_rows(rows, n)
            # y^T M = 0, i.e. M^T y = 0
            hit = (rank_rational(M), count_kernel_points_in_box(M.T, B))
            cache[key] = hit
        return hit

    def add(key, mult):
        r, c = solve(key)
        by_rank[r] = by_rank.get(r, 0) + mult
        sol_by_rank[r] = sol_by_rank.get(r, 0) + mult * c

    if K.fits_int64(K.multilinear_bound(entries, B)):
        coef, var, offs = K.pack_multilinear(entries, k)
        step = 1 << 18
        for start in range(0, outer, step):
            cnt = min(step, outer - start)
            vals = K.gamma_values(coef, var, offs, k, n, B, start, cnt)
            uniq, mult = np.unique(_normalise_rows(vals), axis=0, return_counts=True)
            for row, m in zip(uniq, mult):
                add(tuple(int(v) for v in row), int(m))
    else:
        for flat in itertools.product(range(-B, B + 1), repeat=n * k):
            xs = [flat[s * n:(s + 1) * n] for s in range(k)]
            vals = [_multilinear_value(e, xs) for e in entries]
            g = math.gcd(*vals)
            if g:
                vals = [v // g for v in vals]
                lead = next(v for v in vals if v)
                if lead < 0:
                    vals = [-v for v in vals]
            add(tuple(vals), 1)
    total = sum(sol_by_rank.values())
    return StratifiedCount(total, dict(sorted(by_rank.items())), dict(sorted(sol_by_rank.items())))


def gamma_zero_count_quadratic(F: HomogeneousForm, B: int) -> int:
    """d = 2: the count is #{y : H^T y = 0, |y| <= B}."""
    return count_kernel_points_in_box(hessian_constant_matrix(F).T, B)


@dataclass(frozen=True)
class WeylCountReport:
    form: str
    B_values: tuple[int, ...]
    counts: tuple[int, ...]
    method: str
    fitted_exponent: float
    fitted_log_constant: float
    predicted_exponent: int
    H_value: int
    breakdown: tuple[dict[int, int], ...] = ()
    solution_breakdown: tuple[dict[int, int], ...] = ()


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and intercept of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    if np.ptp(ly) == 0:
        return 0.0, float(ly[0])
    slope, icpt = np.polyfit(lx, ly, 1)
    return float(slope), float(icpt)


def weyl_count(F: HomogeneousForm, B: int, method: str = "auto",
               budget: int = DEFAULT_NAIVE_BUDGET) -> tuple[int, str, StratifiedCount | None]:
    if method == "auto":
        method = "kernel-d2" if F.d == 2 else "stratified"
    if method == "kernel-d2":
        return gamma_zero_count_quadratic(F, B), method, None
    if method == "stratified":
        st = gamma_zero_count_stratified(F, B, budget)
        return st.count, method, st
    if method == "naive":
        return gamma_zero_count_naive(F, B, budget), method, None
    raise ValueError(f"unknown method {method!r}")


def fit_weyl_exponent(F: HomogeneousForm, B_list: Sequence[int], H_value: int | None = None,
                      primes: Sequence[int] = DEFAULT_PRIMES, method: str = "auto",
                      budget: int = DEFAULT_NAIVE_BUDGET) -> WeylCountReport:
    """Fit the slope of log(count) against log(2B+1) and compare with (d-2)n + 𝓗."""
    B_list = sorted(int(b) for b in B_list)
    if len(B_list) < 3:
        raise ValueError("need at least three values of B")
    if H_value is None:
        H_value = hessian_invariant(F, primes).value
    counts, breakdown, sol_breakdown = [], [], []
    used = None
    for B in B_list:
        c, used, st = weyl_count(F, B, method, budget)
        counts.append(c)
        if st is not None:
            breakdown.append(st.outer_by_rank)
            sol_breakdown.append(st.solutions_by_rank)
    slope, icpt = loglog_slope([2 * b + 1 for b in B_list], counts)
    return WeylCountReport(
        form=str(F),
        B_values=tuple(B_list),
        counts=tuple(counts),
        method=used,
        fitted_exponent=slope,
        fitted_log_constant=icpt,
        predicted_exponent=(F.d - 2) * F.n + H_value,
        H_value=H_value,
        breakdown=tuple(breakdown),
        solution_breakdown=tuple(sol_breakdown),
    )
