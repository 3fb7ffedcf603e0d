"""Exponential sums, the Weyl solution set and the rational-approximation dichotomy.

Real parameters are carried as exact :class:`fractions.Fraction` values.
Exponential sums reduce the phase modulo 1 before it ever meets floating
point: with a common denominator ``Q < 2**31`` the phase numerator is an
exact integer, otherwise alpha is held as a 96-bit fixed-point fraction and
the product ``alpha * F(x)`` is formed by modular limb arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import BudgetExceeded, FormParseError, NoFullRankMinor
from .forms import FormSystem, HomogeneousForm, as_system, gamma_eval, gradient, partial
from .linalg import IntegerMatrix, adjugate, determinant, rank_rational, round_half_even
from .strata import DEFAULT_PRIMES, pencil_sigma

DEFAULT_EXPSUM_BUDGET = 10**8
DEFAULT_SOLUTION_BUDGET = 10**7
EXACT_PHASE_LIMIT = 1 << 31
FIXED_BITS = 96
IRRATIONAL_BITS = 128


# --------------------------------------------------------------------------
# exact real parameters

def to_fraction(v) -> Fraction:
    """Exact rational value of ``v``.

    Strings accept ``p/q`` and decimal literals (read exactly); floats give
    their exact binary value.
    """
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v}")
        return Fraction(v)
    if isinstance(v, str):
        s = v.strip()
        if "/" in s:
            num, _, den = s.partition("/")
            try:
                out = Fraction(int(num), int(den))
            except (ValueError, ZeroDivisionError) as exc:
                raise FormParseError(f"bad rational {v!r}") from exc
            return out
        try:
            d = Decimal(s)
        except InvalidOperation as exc:
            raise FormParseError(f"bad real literal {v!r}") from exc
        if not d.is_finite():
            raise FormParseError(f"bad real literal {v!r}")
        return Fraction(d)
    raise TypeError(f"cannot interpret {v!r} as a real number")


def param_fraction(v) -> Fraction:
    """Like :func:`to_fraction`, but floats are read through their shortest repr.

    Scale parameters such as P and eta are typed by hand; 0.4 should mean 2/5.
    """
    if isinstance(v, float):
        return to_fraction(repr(v))
    return to_fraction(v)


def parse_alpha(text: str) -> tuple[Fraction, ...]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise FormParseError("empty alpha list")
    return tuple(to_fraction(p) for p in parts)


def dyadic_approx(x: float | str, bits: int = IRRATIONAL_BITS) -> Fraction:
    return round(to_fraction(x) * (1 << bits)) / Fraction(1 << bits)


def sqrt_fraction(k: int, bits: int = IRRATIONAL_BITS) -> Fraction:
    """floor(sqrt(k) * 2**bits) / 2**bits."""
    return Fraction(math.isqrt(k << (2 * bits)), 1 << bits)


def _log_fraction(t: Fraction) -> float:
    return math.log(t.numerator) - math.log(t.denominator)


def _exact_power_lt(t: Fraction, P: Fraction, e: Fraction) -> bool:
    """t < P**e for rational t >= 0, P > 0 and e = u/v, decided exactly."""
    if t <= 0:
        return True
    lt, rt = _log_fraction(t), float(e) * _log_fraction(P)
    if lt < rt - 1e-9:
        return True
    if lt > rt + 1e-9:
        return False
    u, v = e.numerator, e.denominator
    return t**v < P**u


def floor_power(P: Fraction, eta: Fraction) -> int:
    """floor(P**eta) for P >= 1 and eta >= 0 rational."""
    u, v = eta.numerator, eta.denominator
    target = P**u
    b = int(math.floor(math.exp(float(eta) * _log_fraction(P))))
    b = max(b, 0)
    while b > 0 and b**v > target:
        b -= 1
    while (b + 1) ** v <= target:
        b += 1
    return b


def rational_power(P: Fraction, e: Fraction) -> float:
    return math.exp(float(e) * _log_fraction(P))


# --------------------------------------------------------------------------
# boxes and parameters

@dataclass(frozen=True)
class Box:
    """Product of closed rational intervals inside [-1, 1]."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        ivs = tuple((to_fraction(lo), to_fraction(hi)) for lo, hi in self.intervals)
        for lo, hi in ivs:
            if lo > hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
            if lo < -1 or hi > 1:
                raise ValueError(f"interval [{lo}, {hi}] is not inside [-1, 1]")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def symmetric(cls, n: int, half: Fraction | int = 1) -> "Box":
        h = to_fraction(half)
        return cls(tuple((-h, h) for _ in range(n)))

    @classmethod
    def parse(cls, text: str, n: int) -> "Box":
        """``lo:hi`` per coordinate, comma separated; a single entry is repeated."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if len(parts) == 1:
            parts = parts * n
        if len(parts) != n:
            raise FormParseError(f"box needs {n} intervals, got {len(parts)}")
        ivs = []
        for p in parts:
            lo, sep, hi = p.partition(":")
            if not sep:
                raise FormParseError(f"bad interval {p!r}")
            ivs.append((to_fraction(lo), to_fraction(hi)))
        try:
            return cls(tuple(ivs))
        except ValueError as exc:
            raise FormParseError(str(exc)) from exc

    @property
    def n(self) -> int:
        return len(self.intervals)

    @property
    def theorem_admissible(self) -> bool:
        """Every side has length at most 1."""
        return all(hi - lo <= 1 for lo, hi in self.intervals)

    @property
    def is_symmetric(self) -> bool:
        return all(lo == -hi for lo, hi in self.intervals)

    @property
    def volume(self) -> Fraction:
        return math.prod((hi - lo for lo, hi in self.intervals), start=Fraction(1))

    def lattice_ranges(self, P) -> list[tuple[int, int]]:
        P = param_fraction(P)
        return [(math.ceil(P * lo), math.floor(P * hi)) for lo, hi in self.intervals]

    def npoints(self, P) -> int:
        return math.prod(max(0, hi - lo + 1) for lo, hi in self.lattice_ranges(P))

    def __str__(self) -> str:
        return ",".join(f"{lo}:{hi}" for lo, hi in self.intervals)


@dataclass(frozen=True)
class ExpSumParams:
    P: Fraction
    eta: Fraction
    box: Box | None = None
    eps: Fraction = Fraction(0)

    def __post_init__(self):
        P, eta, eps = param_fraction(self.P), param_fraction(self.eta), param_fraction(self.eps)
        if P < 1:
            raise ValueError("P must be >= 1")
        if not 0 < eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "eps", eps)


# --------------------------------------------------------------------------
# phase encoding

@dataclass(frozen=True)
class _Phase:
    mode: int                  # 0 exact numerators over Q, 1 fixed point
    num: np.ndarray
    Q: int
    limbs: np.ndarray
    frac: tuple[Fraction, ...]


def _encode_alpha(alpha: Sequence[Fraction]) -> _Phase:
    frac = tuple(a - math.floor(a) for a in alpha)
    Q = math.lcm(*(a.denominator for a in frac))
    R = len(frac)
    if Q < EXACT_PHASE_LIMIT:
        num = np.array([int(a * Q) for a in frac], dtype=np.int64)
        return _Phase(0, num, Q, np.zeros((R, 3), np.int64), frac)
    limbs = np.zeros((R, 3), np.int64)
    for l, a in enumerate(frac):
        A = round(a * (1 << FIXED_BITS)) % (1 << FIXED_BITS)
        limbs[l] = [A & 0xFFFFFFFF, (A >> 32) & 0xFFFFFFFF, A >> 64]
    return _Phase(1, np.zeros(R, np.int64), 1, limbs, frac)


def _check_alpha(S: FormSystem, alpha) -> tuple[Fraction, ...]:
    alpha = tuple(to_fraction(a) for a in alpha)
    if len(alpha) != S.R:
        raise ValueError(f"alpha has {len(alpha)} entries, system has {S.R} forms")
    return alpha


# --------------------------------------------------------------------------
# S(alpha)

def exp_sum(S: FormSystem | HomogeneousForm, alpha, P, box: Box | None = None,
            budget: int = DEFAULT_EXPSUM_BUDGET) -> complex:
    """sum over x in P*box of e(sum_l alpha_l F_l(x))."""
    S = as_system(S)
    alpha = _check_alpha(S, alpha)
    box = box or Box.symmetric(S.n)
    if box.n != S.n:
        raise ValueError("box dimension does not match the system")
    ranges = box.lattice_ranges(P)
    total = math.prod(max(0, hi - lo + 1) for lo, hi in ranges)
    if total > budget:
        raise BudgetExceeded("exponential sum lattice points", total, budget)
    if total == 0:
        return 0j
    ph = _encode_alpha(alpha)
    radius = max(max(abs(lo), abs(hi)) for lo, hi in ranges)
    if K.fits_int64(K.value_bound(S.forms, radius)):
        coef, exps, offs = K.pack_forms(S.forms)
        lo = np.array([r[0] for r in ranges], np.int64)
        size = np.array([r[1] - r[0] + 1 for r in ranges], np.int64)
        re_, im_ = K.exp_sum_parts(coef, exps, offs, lo, size, ph.mode, ph.num, ph.Q, ph.limbs)
        return complex(math.fsum(re_), math.fsum(im_))
    return _exp_sum_exact(S, ph.frac, ranges)


def _exp_sum_exact(S: FormSystem, frac, ranges) -> complex:
    import itertools
    from .forms import evaluate
    re_, im_ = [], []
    for x in itertools.product(*(range(lo, hi + 1) for lo, hi in ranges)):
        t = sum((a * evaluate(f, x) for a, f in zip(frac, S.forms)), Fraction(0))
        t -= math.floor(t)
        ang = 2.0 * math.pi * float(t)
        re_.append(math.cos(ang))
        im_.append(math.sin(ang))
    return complex(math.fsum(re_), math.fsum(im_))


# --------------------------------------------------------------------------
# Weyl solution set

def solution_threshold_exponent(d: int, eta: Fraction) -> Fraction:
    return (eta - 1) * (d - 1) - 1


def _gamma_blocks(S: FormSystem):
    # block l*n + i holds Gamma_l(., e_i), i.e. the multilinear form of dF_l/dx_i
    return [g for F in S.forms for g in gradient(F)]


def _kmax(Q: int, P: Fraction, e: Fraction) -> int:
    """Largest k with k/Q < P**e (at least 0 since P**e > 0)."""
    lo, hi = 0, Q // 2 + 1
    if _exact_power_lt(Fraction(hi, Q), P, e):
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _exact_power_lt(Fraction(mid, Q), P, e):
            lo = mid
        else:
            hi = mid
    return lo


def _passes_exact(S: FormSystem, frac, xs, P: Fraction, e: Fraction) -> bool:
    for i in range(1, S.n + 1):
        t = Fraction(0)
        for a, F in zip(frac, S.forms):
            t += a * gamma_eval(partial(F, i), xs)
        dist = abs(t - round(t))
        if not _exact_power_lt(dist, P, e):
            return False
    return True


def _confirm_exact(coef, var, offs, n: int, frac, cand: np.ndarray, P: Fraction, e: Fraction) -> np.ndarray:
    """Exact test of candidate tuples whose Gamma values are known to fit in int64.

    With Q the common denominator of alpha, a tuple passes when every
    residue of Q * sum_l alpha_l Gamma_l(., e_i) lies within kmax of 0 mod Q.
    """
    Q = math.lcm(*(a.denominator for a in frac))
    nums = [int(a * Q) for a in frac]
    kmax = _kmax(Q, P, e)
    vals = np.stack([K._multilinear_np(coef[offs[b]:offs[b + 1]], var[offs[b]:offs[b + 1]], cand)
                     for b in range(len(offs) - 1)], axis=1) if cand.shape[0] else np.zeros((0, len(offs) - 1), np.int64)
    keep = np.ones(cand.shape[0], dtype=bool)
    # tuples with every Gamma value zero pass trivially
    for r in np.flatnonzero(vals.any(axis=1)).tolist():
        row = vals[r].tolist()
        for i in range(n):
            m = sum(N * row[l * n + i] for l, N in enumerate(nums)) % Q
            if min(m, Q - m) > kmax:
                keep[r] = False
                break
    return keep


def _decode_tuples(idx: np.ndarray, k: int, n: int, B: int) -> np.ndarray:
    dim = k * n
    base = 2 * B + 1
    out = np.empty((idx.shape[0], dim), np.int64)
    t = idx.astype(np.int64).copy()
    for j in range(dim - 1, -1, -1):
        out[:, j] = t % base - B
        t //= base
    return out.reshape(-1, k, n)


def weyl_solutions_array(S: FormSystem | HomogeneousForm, alpha, P, eta,
                         budget: int = DEFAULT_SOLUTION_BUDGET) -> tuple[np.ndarray, int]:
    """Solutions as an int64 array of shape (count, d-1, n) in lexicographic order, and B."""
    S = as_system(S)
    alpha = _check_alpha(S, alpha)
    P, eta = param_fraction(P), param_fraction(eta)
    n, k = S.n, S.d - 1
    B = floor_power(P, eta)
    total = (2 * B + 1) ** (n * k)
    if total > budget:
        raise BudgetExceeded("Weyl solution tuples", total, budget)
    e = solution_threshold_exponent(S.d, eta)
    ph = _encode_alpha(alpha)
    blocks = _gamma_blocks(S)
    if K.fits_int64(K.multilinear_bound(blocks, B)):
        coef, var, offs = K.pack_multilinear(blocks, k)
        if ph.mode == 0:
            kmax = _kmax(ph.Q, P, e)
            mask = K.weyl_mask(coef, var, offs, k, n, B, 0, ph.num, ph.Q, kmax, ph.limbs, 0.0)
            return _decode_tuples(np.flatnonzero(mask), k, n, B), B
        # fixed point gives a superset; each candidate is confirmed exactly
        thr = rational_power(P, e) * (1 + 1e-6) + 1e-12
        mask = K.weyl_mask(coef, var, offs, k, n, B, 1, ph.num, 1, 0, ph.limbs, thr)
        cand = _decode_tuples(np.flatnonzero(mask), k, n, B)
        return cand[_confirm_exact(coef, var, offs, n, ph.frac, cand, P, e)], B
    import itertools
    rows = []
    for flat in itertools.product(range(-B, B + 1), repeat=n * k):
        xs = [list(flat[s * n:(s + 1) * n]) for s in range(k)]
        if _passes_exact(S, ph.frac, xs, P, e):
            rows.append(flat)
    arr = np.array(rows, dtype=object if rows else np.int64).reshape(-1, k, n)
    return arr, B


def weyl_solution_set(S: FormSystem | HomogeneousForm, alpha, P, eta,
                      budget: int = DEFAULT_SOLUTION_BUDGET) -> list[tuple[tuple[int, ...], ...]]:
    """Tuples (x_1..x_{d-1}) in [-B, B], B = floor(P**eta), with
    ||sum_l alpha_l Gamma_l(x_1, ..., x_{d-1}, e_i)|| < P**((eta-1)(d-1)-1) for every i."""
    arr, _ = weyl_solutions_array(S, alpha, P, eta, budget)
    return [tuple(map(tuple, sol)) for sol in arr.tolist()]


# --------------------------------------------------------------------------
# M-matrix and the rational approximation

def _gamma_columns(S: FormSystem, sols) -> np.ndarray:
    """Array (n, #sol, R): entry [j, s, l] = Gamma_l(sol_s, e_j), exact ints (object dtype)."""
    n, R, k = S.n, S.R, S.d - 1
    sols = np.asarray(sols)
    if sols.ndim == 2:
        sols = sols.reshape(-1, k, n)
    m = sols.shape[0]
    out = np.zeros((n, m, R), dtype=object)
    blocks = _gamma_blocks(S)
    B = int(np.abs(sols).max()) if sols.size else 0
    if sols.dtype != object and K.fits_int64(K.multilinear_bound(blocks, B)):
        coef, var, offs = K.pack_multilinear(blocks, k)
        xs = sols.astype(np.int64)
        for l in range(R):
            for j in range(n):
                b = l * n + j
                sl = slice(offs[b], offs[b + 1])
                out[j, :, l] = K._multilinear_np(coef[sl], var[sl], xs).astype(object) if m else []
        return out
    for l, F in enumerate(S.forms):
        for j in range(n):
            g = partial(F, j + 1)
            for s in range(m):
                out[j, s, l] = gamma_eval(g, [[int(v) for v in x] for x in sols[s]])
    return out


def build_M_matrix(S: FormSystem | HomogeneousForm, solutions) -> IntegerMatrix:
    """R x (n * #solutions) matrix [M_1 ... M_n]; column j*#sol + s is Gamma(sol_s, e_j)."""
    S = as_system(S)
    if len(solutions) == 0:
        raise ValueError("the solution list is empty")
    cols = _gamma_columns(S, solutions)
    n, m, R = cols.shape
    rows = [[int(cols[j, s, l]) for j in range(n) for s in range(m)] for l in range(R)]
    return IntegerMatrix.from_rows(rows, n * m)


def _select_minor(columns: Sequence[Sequence[int]], R: int) -> list[int]:
    """Greedy scan in column order: keep a column when it raises the rank."""
    chosen: list[int] = []
    picked: list[list[int]] = []
    for idx, col in enumerate(columns):
        if not any(col):
            continue
        trial = picked + [list(col)]
        if rank_rational(IntegerMatrix.from_rows(trial, R)) == len(trial):
            chosen.append(idx)
            picked = trial
            if len(chosen) == R:
                break
    return chosen


def _distinct_directions(cols: np.ndarray) -> list[int]:
    """Indices of the first column of each projective class, in column order.

    Dropping later scalar multiples never changes which columns the greedy
    scan picks.
    """
    seen: set[tuple[int, ...]] = set()
    keep = []
    for idx in range(cols.shape[0]):
        col = [int(v) for v in cols[idx]]
        g = math.gcd(*col)
        if not g:
            continue
        col = [v // g for v in col]
        if next(v for v in col if v) < 0:
            col = [-v for v in col]
        key = tuple(col)
        if key not in seen:
            seen.add(key)
            keep.append(idx)
    return keep


@dataclass(frozen=True)
class RationalApprox:
    q: int
    a: tuple[int, ...]
    residuals: tuple[Fraction, ...]
    det_M0: int
    minor_columns: tuple[int, ...]
    gcd_d: int
    m: tuple[int, ...]
    certified_bound: float
    reference_bound: float
    bound_constant: float
    q_reference: float
    q_exponent: Fraction
    residual_exponent: Fraction

    @property
    def max_residual(self) -> Fraction:
        return max(self.residuals)


def _gamma_coeff_max(S: FormSystem) -> int:
    return max((sum(abs(c) for c, _ in g.multilinear_terms) if g else 0) for g in _gamma_blocks(S))


def _approx_from_columns(S: FormSystem, alpha, col_vectors, col_ids, P: Fraction, eta: Fraction) -> RationalApprox:
    R, d = S.R, S.d
    M0 = IntegerMatrix.from_rows([[col_vectors[s][l] for s in range(R)] for l in range(R)], R)
    det = determinant(M0)
    C = adjugate(M0)
    vals = [sum((alpha[l] * M0[l, s] for l in range(R)), Fraction(0)) for s in range(R)]
    m = [round_half_even(v.numerator, v.denominator) for v in vals]
    num = [sum(C[l, s] * m[s] for s in range(R)) for l in range(R)]
    g = math.gcd(det, *num)
    q = abs(det) // g
    sgn = 1 if det > 0 else -1
    a = tuple(sgn * v // g for v in num)
    residuals = tuple(abs(q * alpha[l] - a[l]) for l in range(R))
    e = solution_threshold_exponent(d, eta)
    theta = rational_power(P, e)
    certified = max(sum(abs(C[l, s]) for s in range(R)) for l in range(R)) * theta / g
    gmax = _gamma_coeff_max(S)
    const = math.factorial(R) * gmax ** (R - 1)
    res_exp = -d + R * (d - 1) * eta
    q_exp = R * (d - 1) * eta
    return RationalApprox(
        q=q, a=a, residuals=residuals, det_M0=det, minor_columns=tuple(col_ids), gcd_d=g,
        m=tuple(m), certified_bound=certified,
        reference_bound=const * rational_power(P, res_exp), bound_constant=float(const),
        q_reference=math.factorial(R) * gmax**R * rational_power(P, q_exp),
        q_exponent=q_exp, residual_exponent=res_exp)


def rational_approx_from_minor(S: FormSystem | HomogeneousForm, alpha, M: IntegerMatrix,
                               solutions, P, eta) -> RationalApprox:
    """(q, a) from the first full-rank R x R minor of M."""
    S = as_system(S)
    alpha = _check_alpha(S, alpha)
    R = S.R
    if M.rows != R:
        raise ValueError("M must have R rows")
    columns = [[M[l, c] for l in range(R)] for c in range(M.cols)]
    chosen = _select_minor(columns, R)
    if len(chosen) < R:
        raise NoFullRankMinor(f"M has rank {len(chosen)} < R = {R}")
    return _approx_from_columns(S, alpha, [columns[c] for c in chosen], chosen,
                                param_fraction(P), param_fraction(eta))


@dataclass(frozen=True)
class DichotomyResult:
    branch: str                           # "RationalApproxFound" or "MinorBound"
    K: Fraction
    sigma: int
    P: Fraction
    eta: Fraction
    eps: Fraction
    B: int
    n_solutions: int
    rank_M: int
    approx: RationalApprox | None = None
    S_abs: float | None = None
    minor_exponent: Fraction | None = None
    minor_reference: float | None = None
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def minor_ratio(self) -> float | None:
        if self.S_abs is None:
            return None
        return self.S_abs / self.minor_reference

    def certificate_ok(self, fitted_constant: float | None = None, rel: float = 1e-9) -> bool:
        if self.branch == "RationalApproxFound":
            a = self.approx
            if math.gcd(a.q, *a.a) != 1 or a.q < 1:
                return False
            return all(float(r) <= a.certified_bound * (1 + rel) for r in a.residuals)
        if fitted_constant is None:
            return True
        return self.S_abs <= fitted_constant * self.minor_reference * (1 + rel)


def dichotomy_check(S: FormSystem | HomogeneousForm, alpha, params: ExpSumParams,
                    sigma: int | None = None, primes: Sequence[int] = DEFAULT_PRIMES,
                    c_radius: int = 3, solution_budget: int = DEFAULT_SOLUTION_BUDGET,
                    expsum_budget: int = DEFAULT_EXPSUM_BUDGET) -> DichotomyResult:
    S = as_system(S)
    alpha = _check_alpha(S, alpha)
    n, d, R = S.n, S.d, S.R
    if sigma is None:
        sigma = pencil_sigma(S, primes, c_radius).sigma
    Kexp = Fraction(n - sigma, 2 ** (d - 1))
    P, eta, eps = params.P, params.eta, params.eps
    sols, B = weyl_solutions_array(S, alpha, P, eta, solution_budget)
    cols = _gamma_columns(S, sols)
    flat = cols.reshape(n * sols.shape[0], R)            # column order j * #sol + s
    keep = _distinct_directions(flat)
    chosen = _select_minor([[int(v) for v in flat[i]] for i in keep], R)
    chosen = [keep[i] for i in chosen]
    base = dict(K=Kexp, sigma=sigma, P=P, eta=eta, eps=eps, B=B,
                n_solutions=int(sols.shape[0]), rank_M=len(chosen))
    if len(chosen) == R:
        approx = _approx_from_columns(S, alpha, [[int(v) for v in flat[i]] for i in chosen],
                                      chosen, P, eta)
        return DichotomyResult(branch="RationalApproxFound", approx=approx, **base)
    value = exp_sum(S, alpha, P, params.box, expsum_budget)
    expo = n - Kexp * eta + eps
    return DichotomyResult(branch="MinorBound", S_abs=abs(value), minor_exponent=expo,
                           minor_reference=rational_power(P, expo),
                           extras={"S": value}, **base)
