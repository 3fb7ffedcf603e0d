"""Hessian rank strata, the invariant 𝓗, the singular locus and the pencil maximum.

For degree 2 the Hessian is a constant matrix and 𝓗 = n - rank H exactly.
For higher degree the dimension of ``{x : rank H(x) <= r}`` is estimated by
counting points over several prime fields and rounding ``log_p N_p``.

Counting uses two exact reductions.  The loci are cones (entries are
homogeneous), so only projective representatives are enumerated and each
stands for ``p - 1`` affine points.  When the variables split into blocks no
monomial crosses, the Hessian is block diagonal and the rank histogram is
the convolution of the per-block histograms.
"""
from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import BadPrimeError, BudgetExceeded
from .forms import (
    Form,
    FormSystem,
    HomogeneousForm,
    as_system,
    evaluate,
    hessian_entry,
    partial,
    pencil_combine,
    restrict,
    variable_blocks,
)
from .linalg import IntegerMatrix, is_prime, rank_mod_p, rank_rational

DEFAULT_PRIMES = (101, 211, 401)
DEFAULT_MODP_BUDGET = 4 * 10**9


@dataclass(frozen=True)
class DimensionEstimate:
    counts: tuple[tuple[int, int], ...]
    ambient: int
    dim: int | None
    agreement: bool
    method: str = "modp-count"

    @property
    def empty(self) -> bool:
        return self.dim is None

    def per_prime_dims(self) -> list[int | None]:
        return [_round_log(c, p, self.ambient) for p, c in self.counts]


def _round_log(count: int, p: int, ambient: int) -> int | None:
    if count <= 0:
        return None
    return min(ambient, max(0, math.floor(math.log(count) / math.log(p) + 0.5)))


def fit_dimension(counts: Sequence[tuple[int, int]], ambient: int,
                  method: str = "modp-count") -> DimensionEstimate:
    """Round the median of ``log_p N_p``; Empty only when every count is zero."""
    counts = tuple((int(p), int(c)) for p, c in counts)
    if all(c == 0 for _, c in counts):
        return DimensionEstimate(counts, ambient, None, True, method)
    logs = [math.log(c) / math.log(p) if c > 0 else -math.inf for p, c in counts]
    med = statistics.median(logs)
    if med == -math.inf:
        dim = None
    else:
        dim = min(ambient, max(0, math.floor(med + 0.5)))
    rounded = {_round_log(c, p, ambient) for p, c in counts}
    return DimensionEstimate(counts, ambient, dim, len(rounded) == 1, method)


# --------------------------------------------------------------------------
# prime checks and polynomial-matrix packing

def check_prime(F: Form, p: int) -> None:
    if not is_prime(p):
        raise BadPrimeError(f"{p} is not prime")
    if math.factorial(F.d) % p == 0:
        raise BadPrimeError(f"{p} divides {F.d}!")
    n = F.n
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            h = hessian_entry(F, a, b)
            if h and h.content % p == 0:
                raise BadPrimeError(f"{p} divides the content of Hessian entry ({a},{b})")


def _pack_matrix(entries: Sequence[tuple[int, Form]], nv: int, p: int):
    ent, coef, exps = [], [], []
    maxd = 0
    for idx, f in entries:
        if not f:
            continue
        maxd = max(maxd, f.d)
        for e, c in f.items():
            if c % p:
                ent.append(idx)
                coef.append(c % p)
                exps.append(e)
    return (np.array(ent, dtype=np.int64),
            np.array(coef, dtype=np.int64),
            np.array(exps, dtype=np.int64).reshape(-1, nv),
            maxd)


def _projective_size(p: int, m: int) -> int:
    return (p**m - 1) // (p - 1)


def _projective_rank_hist(entries, nrows, ncols, nv, p, budget) -> np.ndarray:
    size = _projective_size(p, nv)
    if size > budget:
        raise BudgetExceeded(f"F_{p} projective enumeration in {nv} variables", size, budget)
    ent, coef, exps, maxd = _pack_matrix(entries, nv, p)
    return K.rank_hist_projective(ent, coef, exps, nrows, ncols, maxd, p, _inverse(p))


@lru_cache(maxsize=64)
def _inverse(p: int) -> np.ndarray:
    return K.inverse_table(p)


def _convolve(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


@lru_cache(maxsize=512)
def rank_histogram_mod_p(F: HomogeneousForm, p: int, budget: int = DEFAULT_MODP_BUDGET) -> tuple[int, ...]:
    """hist[r] = #{x in F_p^n : rank_p H_F(x) = r}, exactly."""
    check_prime(F, p)
    n = F.n
    if F.d == 2:
        H = hessian_constant_matrix(F)
        hist = [0] * (n + 1)
        hist[rank_mod_p(H, p)] = p**n
        return tuple(hist)
    total = [1]
    for block in variable_blocks([F], n):
        sub = restrict(F, block)
        nb = len(block)
        if not sub:
            part = [p**nb]
        else:
            entries = [(a * nb + b, hessian_entry(sub, a + 1, b + 1))
                       for a in range(nb) for b in range(nb)]
            proj = _projective_rank_hist(entries, nb, nb, nb, p, budget)
            part = [int(v) * (p - 1) for v in proj]
            part[0] += 1
        total = _convolve(total, part)
    total += [0] * (n + 1 - len(total))
    return tuple(total[: n + 1])


def _constant(f: Form) -> int:
    if not f:
        return 0
    (exps, c), = f.items()
    return c


def hessian_constant_matrix(F: HomogeneousForm) -> IntegerMatrix:
    if F.d != 2:
        raise ValueError("Hessian is constant only for quadratic forms")
    n = F.n
    return IntegerMatrix.from_rows([[_constant(hessian_entry(F, a, b)) for b in range(1, n + 1)]
                                    for a in range(1, n + 1)])


def hessian_at(F: HomogeneousForm, x: Sequence[int]) -> IntegerMatrix:
    n = F.n
    if len(x) != n:
        raise ValueError(f"point has length {len(x)}, form has {n} variables")
    return IntegerMatrix.from_rows([[evaluate(hessian_entry(F, a, b), x) for b in range(1, n + 1)]
                                    for a in range(1, n + 1)])


def hessian_rank_at(F: HomogeneousForm, x: Sequence[int]) -> int:
    return rank_rational(hessian_at(F, x))


def stratum_count_mod_p(F: HomogeneousForm, r: int, p: int,
                        budget: int = DEFAULT_MODP_BUDGET) -> int:
    """#{x in F_p^n : rank_p H_F(x) <= r}."""
    if not 0 <= r <= F.n:
        raise ValueError(f"r must lie in 0..{F.n}")
    return sum(rank_histogram_mod_p(F, p, budget)[: r + 1])


def estimate_stratum_dim(F: HomogeneousForm, r: int, primes: Sequence[int] = DEFAULT_PRIMES,
                         budget: int = DEFAULT_MODP_BUDGET) -> DimensionEstimate:
    if len(primes) < 2:
        raise ValueError("at least two primes are needed for a dimension fit")
    counts = [(p, stratum_count_mod_p(F, r, p, budget)) for p in primes]
    return fit_dimension(counts, F.n)


@dataclass(frozen=True)
class HessianReport:
    form: str
    method: str
    strata: tuple[DimensionEstimate, ...]
    value: int

    @property
    def agreement(self) -> bool:
        return all(s.agreement for s in self.strata)

    def stratum_dims(self) -> list[int | None]:
        return [s.dim for s in self.strata]


def strata_invariant(F: HomogeneousForm, primes: Sequence[int] = DEFAULT_PRIMES,
                     budget: int = DEFAULT_MODP_BUDGET) -> HessianReport:
    """max_r (dim{rank H <= r} - r) from mod-p strata, for any degree."""
    strata = tuple(estimate_stratum_dim(F, r, primes, budget) for r in range(F.n + 1))
    value = max(s.dim - r for r, s in enumerate(strata) if not s.empty)
    return HessianReport(str(F), "modp-estimate", strata, value)


def hessian_invariant(F: HomogeneousForm, primes: Sequence[int] = DEFAULT_PRIMES,
                      budget: int = DEFAULT_MODP_BUDGET) -> HessianReport:
    if F.d > 2:
        return strata_invariant(F, primes, budget)
    n = F.n
    rank = rank_rational(hessian_constant_matrix(F))
    strata = []
    for r in range(n + 1):
        counts = tuple((p, p**n if r >= rank else 0) for p in primes)
        dim = n if r >= rank else None
        strata.append(DimensionEstimate(counts, n, dim, True, "exact-linear"))
    return HessianReport(str(F), "exact-quadratic", tuple(strata), n - rank)


# --------------------------------------------------------------------------
# singular locus

def _check_system_prime(S: FormSystem, p: int) -> None:
    if not is_prime(p):
        raise BadPrimeError(f"{p} is not prime")
    if math.factorial(S.d) % p == 0:
        raise BadPrimeError(f"{p} divides {S.d}!")


def singular_locus_count_mod_p(S: FormSystem | HomogeneousForm, p: int,
                               budget: int = DEFAULT_MODP_BUDGET) -> int:
    """#{x in F_p^n : rank_p [dF_l/dx_i](x) < R}."""
    S = as_system(S)
    _check_system_prime(S, p)
    n, R = S.n, S.R
    if R == 1:
        F = S.forms[0]
        total = 1
        for block in variable_blocks([F], n):
            sub = restrict(F, block)
            nb = len(block)
            if not sub:
                total *= p**nb
                continue
            entries = [(i, partial(sub, i + 1)) for i in range(nb)]
            proj = _projective_rank_hist(entries, 1, nb, nb, p, budget)
            total *= 1 + (p - 1) * int(proj[0])
        return total
    entries = [(l * n + i, partial(F, i + 1)) for l, F in enumerate(S.forms) for i in range(n)]
    proj = _projective_rank_hist(entries, R, n, n, p, budget)
    return 1 + (p - 1) * int(sum(proj[:R]))


def singular_locus_dim(S: FormSystem | HomogeneousForm, primes: Sequence[int] = DEFAULT_PRIMES,
                       budget: int = DEFAULT_MODP_BUDGET) -> DimensionEstimate:
    S = as_system(S)
    n = S.n
    if S.d == 2 and S.R == 1:
        # the gradient of a quadratic form is H x: V* is the kernel of H
        H = hessian_constant_matrix(S.forms[0])
        corank = n - rank_rational(H)
        counts = tuple((p, p ** (n - rank_mod_p(H, p))) for p in primes)
        agree = all(c == p**corank for p, c in counts)
        return DimensionEstimate(counts, n, corank, agree, "exact-linear")
    counts = [(p, singular_locus_count_mod_p(S, p, budget)) for p in primes]
    return fit_dimension(counts, n)


# --------------------------------------------------------------------------
# pencil maximum

@dataclass(frozen=True)
class PencilReport:
    sigma: int
    c: tuple[int, ...]
    c_radius: int
    primes: tuple[int, ...]
    evaluated: tuple[tuple[tuple[int, ...], int], ...] = field(default=(), repr=False)


def primitive_directions(R: int, radius: int):
    """Primitive integer vectors with sup-norm <= radius, one per +-pair.

    Ordered by sup-norm, then lexicographically; the representative has a
    positive first nonzero entry.
    """
    seen = []
    for c in itertools.product(range(-radius, radius + 1), repeat=R):
        if not any(c) or math.gcd(*c) != 1:
            continue
        lead = next(v for v in c if v)
        if lead < 0:
            continue
        seen.append(c)
    seen.sort(key=lambda c: (max(abs(v) for v in c), c))
    return seen


def pencil_sigma(S: FormSystem | HomogeneousForm, primes: Sequence[int] = DEFAULT_PRIMES,
                 c_radius: int = 3, budget: int = DEFAULT_MODP_BUDGET) -> PencilReport:
    """max of 𝓗_{c.F} over primitive c with |c| <= c_radius (zero combinations skipped)."""
    S = as_system(S)
    if c_radius < 1:
        raise ValueError("c_radius must be >= 1")
    best, best_c = None, None
    seen = []
    for c in primitive_directions(S.R, c_radius):
        G = pencil_combine(S, c)
        if not G:
            continue
        h = hessian_invariant(G, primes, budget).value
        seen.append((c, h))
        if best is None or h > best:
            best, best_c = h, c
    if best is None:
        raise ValueError("every combination in the search radius is the zero form")
    return PencilReport(best, best_c, c_radius, tuple(primes), tuple(seen))
