"""Integer zeros in dilated boxes and the Hardy-Littlewood comparison."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels as K
from .circle import Box, param_fraction
from .errors import BudgetExceeded
from .forms import FormSystem, HomogeneousForm, ZeroForm, as_system, restrict, scale, variable_blocks

DEFAULT_COUNT_BUDGET = 10**8
DEFAULT_SERIES_BUDGET = 10**7


def _ranges(box: Box, P) -> list[tuple[int, int]]:
    return box.lattice_ranges(P)


def count_zeros_box(S: FormSystem | HomogeneousForm, P, box: Box | None = None,
                    budget: int = DEFAULT_COUNT_BUDGET) -> int:
    S = as_system(S)
    box = box or Box.symmetric(S.n)
    ranges = _ranges(box, P)
    total = math.prod(max(0, hi - lo + 1) for lo, hi in ranges)
    if total > budget:
        raise BudgetExceeded("lattice points", total, budget)
    if total == 0:
        return 0
    radius = max(max(abs(lo), abs(hi)) for lo, hi in ranges)
    if K.fits_int64(K.value_bound(S.forms, radius)):
        coef, exps, offs = K.pack_forms(S.forms)
        lo = np.array([r[0] for r in ranges], np.int64)
        size = np.array([r[1] - r[0] + 1 for r in ranges], np.int64)
        return int(K.count_common_zeros(coef, exps, offs, lo, size))
    import itertools
    from .forms import evaluate
    return sum(1 for x in itertools.product(*(range(lo, hi + 1) for lo, hi in ranges))
               if all(evaluate(f, x) == 0 for f in S.forms))


def _value_histogram(f, ranges, budget: int) -> dict[int, int]:
    total = math.prod(max(0, hi - lo + 1) for lo, hi in ranges)
    if total > budget:
        raise BudgetExceeded("half-box points", total, budget)
    if total == 0:
        return {}
    if not f:
        return {0: total}
    radius = max(max(abs(lo), abs(hi)) for lo, hi in ranges)
    if K.fits_int64(K.value_bound([f], radius)):
        coef, exps, _ = K.pack_forms([f])
        lo = np.array([r[0] for r in ranges], np.int64)
        size = np.array([r[1] - r[0] + 1 for r in ranges], np.int64)
        vals, cnt = np.unique(K.form_values(coef, exps, lo, size), return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}
    import itertools
    from .forms import evaluate
    hist: dict[int, int] = {}
    for x in itertools.product(*(range(lo, hi + 1) for lo, hi in ranges)):
        v = evaluate(f, x)
        hist[v] = hist.get(v, 0) + 1
    return hist


def auto_split(F: HomogeneousForm) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Group the variable blocks of F into two halves of balanced size."""
    blocks = sorted(variable_blocks([F], F.n), key=len, reverse=True)
    if len(blocks) < 2:
        raise ValueError("form does not split into two variable blocks")
    a, b = [], []
    for blk in blocks:
        (a if len(a) <= len(b) else b).extend(blk)
    return tuple(sorted(a)), tuple(sorted(b))


def count_zeros_split(F: HomogeneousForm, P, block_a: Sequence[int] | None = None,
                      block_b: Sequence[int] | None = None, box: Box | None = None,
                      budget: int = DEFAULT_COUNT_BUDGET) -> int:
    """N(P) for F = g(x_A) - h(x_B) by matching value histograms of g and h.

    Blocks are 0-based variable positions; when omitted they are chosen by
    :func:`auto_split`.
    """
    n = F.n
    if block_a is None or block_b is None:
        block_a, block_b = auto_split(F)
    A, Bk = tuple(block_a), tuple(block_b)
    if set(A) & set(Bk) or sorted(A + Bk) != list(range(n)) or not A or not Bk:
        raise ValueError("blocks must be nonempty, disjoint and cover all variables")
    inA = set(A)
    for exps, _ in F.items():
        used = {i for i, k in enumerate(exps) if k}
        if not (used <= inA or not (used & inA)):
            raise ValueError("a monomial mixes variables of both blocks")
    box = box or Box.symmetric(n)
    ranges = _ranges(box, P)
    g = restrict(F, A)
    h = restrict(F, Bk)
    h = scale(h, -1) if h else ZeroForm(len(Bk), F.d)
    hg = _value_histogram(g, [ranges[i] for i in A], budget)
    hh = _value_histogram(h, [ranges[i] for i in Bk], budget)
    if len(hg) > len(hh):
        hg, hh = hh, hg
    return sum(c * hh.get(v, 0) for v, c in hg.items())


# --------------------------------------------------------------------------
# singular series

def _mobius(k: int) -> int:
    out, p = 1, 2
    while p * p <= k:
        if k % p == 0:
            k //= p
            if k % p == 0:
                return 0
            out = -out
        p += 1
    return -out if k > 1 else out


def _divisors(q: int) -> list[int]:
    return [e for e in range(1, q + 1) if q % e == 0]


def _joint_histogram(S: FormSystem, q: int, budget: int) -> np.ndarray:
    """N(v) = #{x mod q : F(x) = v mod q} as an int64 array of shape (q,)*R."""
    R = S.R
    blocks = variable_blocks(S.forms, S.n)
    hist = np.zeros((q,) * R, np.int64)
    hist[(0,) * R] = 1
    for blk in blocks:
        m = len(blk)
        pts = q**m
        if pts > budget:
            raise BudgetExceeded(f"residues mod {q} in a block of {m} variables", pts, budget)
        parts = [restrict(F, blk) for F in S.forms]
        lo = np.zeros(m, np.int64)
        size = np.full(m, q, np.int64)
        idx = []
        for f in parts:
            if not f:
                idx.append(np.zeros(pts, np.int64))
                continue
            if not K.fits_int64(K.value_bound([f], q)):
                raise BudgetExceeded("singular-series values beyond int64", K.value_bound([f], q), 1 << 62)
            coef, exps, _ = K.pack_forms([f])
            idx.append(np.mod(K.form_values(coef, exps, lo, size), q))
        flat = np.ravel_multi_index(tuple(idx), (q,) * R) if R > 1 else idx[0]
        local = np.bincount(flat, minlength=q**R).reshape((q,) * R)
        hist = _cyclic_convolve(hist, local, q)
    return hist


def _cyclic_convolve(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    out = np.zeros_like(a)
    for pos in zip(*np.nonzero(b)):
        out += b[pos] * np.roll(a, shift=pos, axis=tuple(range(a.ndim)))
    return out


def singular_series_term(S: FormSystem | HomogeneousForm, q: int,
                         budget: int = DEFAULT_SERIES_BUDGET) -> Fraction:
    """A(q) = q^{-n} sum over a mod q with gcd(a, q) = 1 of sum_x e(a.F(x)/q), exactly.

    The inner sum over primitive a is a Ramanujan-type sum: for a value
    vector v it equals sum_{e | q} mu(e) (q/e)^R [q/e divides every v_l].
    """
    S = as_system(S)
    if q == 1:
        return Fraction(1)
    R = S.R
    hist = _joint_histogram(S, q, budget)
    total = 0
    for e in _divisors(q):
        mu = _mobius(e)
        if not mu:
            continue
        f = q // e
        sub = hist[(slice(None, None, f),) * R]
        total += mu * f**R * int(sub.sum())
    return Fraction(total, q**S.n)


@dataclass(frozen=True)
class SingularSeries:
    Qmax: int
    terms: tuple[Fraction, ...]
    partial_sums: tuple[float, ...]
    value: float
    stable: bool
    window_change: float


def truncated_singular_series(S: FormSystem | HomogeneousForm, Qmax: int,
                              budget: int = DEFAULT_SERIES_BUDGET, window: int = 10,
                              tol: float = 0.01) -> SingularSeries:
    """Sum of A(q) over q <= Qmax, with a stability flag over the last ``window`` values of q."""
    if Qmax < 1:
        raise ValueError("Qmax must be >= 1")
    S = as_system(S)
    terms, sums = [], []
    acc = Fraction(0)
    for q in range(1, Qmax + 1):
        t = singular_series_term(S, q, budget)
        terms.append(t)
        acc += t
        sums.append(float(acc))
    last = sums[-1]
    tail = sums[max(0, Qmax - window):]
    change = max(abs(s - last) for s in tail) / abs(last) if last else math.inf
    stable = Qmax > window and change <= tol
    return SingularSeries(Qmax, tuple(terms), tuple(sums), last, stable, change)


# --------------------------------------------------------------------------
# singular integral

@dataclass(frozen=True)
class SingularIntegral:
    value: float
    stderr: float
    eps: tuple[float, ...]
    estimates: tuple[float, ...]
    estimate_errors: tuple[float, ...]
    samples: int
    seed: int
    method: str
    converged: bool
    power: float


def _eval_float(F, z: np.ndarray) -> np.ndarray:
    out = np.zeros(z.shape[0])
    for exps, coef in F.items():
        term = np.full(z.shape[0], float(coef))
        for j, k in enumerate(exps):
            if k:
                term *= z[:, j] ** k
        out += term
    return out


def singular_integral(S: FormSystem | HomogeneousForm, box: Box | None = None,
                      eps_list: Sequence[float] = (0.02, 0.01, 0.005),
                      samples: int = 4_000_000, seed: int = 0,
                      budget: int = 10**8, power: float | None = None) -> SingularIntegral:
    """Monte Carlo estimate of lim (2 eps)^{-R} vol{z in box : |F_l(z)| < eps for all l}.

    The same samples serve every eps; the estimates are extrapolated to
    eps = 0 by a least-squares fit in eps^power.  The default power is
    min(2, n/d - R): a smooth locus gives an eps^2 correction, while the
    cone point at the origin contributes eps^(n/d - R).
    """
    S = as_system(S)
    box = box or Box.symmetric(S.n)
    if samples > budget:
        raise BudgetExceeded("Monte Carlo samples", samples, budget)
    eps = sorted((float(e) for e in eps_list), reverse=True)
    if not eps or eps[-1] <= 0:
        raise ValueError("eps values must be positive")
    R = S.R
    if power is None:
        power = min(2.0, S.n / S.d - R)
    lo = np.array([float(a) for a, _ in box.intervals])
    hi = np.array([float(b) for _, b in box.intervals])
    vol = float(box.volume)
    rng = np.random.default_rng(seed)
    hits = np.zeros(len(eps), dtype=np.int64)
    step = 1 << 18
    done = 0
    while done < samples:
        cnt = min(step, samples - done)
        z = lo + (hi - lo) * rng.random((cnt, S.n))
        m = np.zeros(cnt)
        for F in S.forms:
            m = np.maximum(m, np.abs(_eval_float(F, z)))
        for i, e in enumerate(eps):
            hits[i] += int(np.count_nonzero(m < e))
        done += cnt
    est, err = [], []
    for h, e in zip(hits, eps):
        p = h / samples
        scale_ = vol / (2 * e) ** R
        est.append(scale_ * p)
        err.append(scale_ * math.sqrt(max(p * (1 - p), 1.0 / samples) / samples))
    if len(eps) == 1 or power <= 0:
        value, stderr = est[0], err[0]
    else:
        X = np.column_stack([np.ones(len(eps)), np.array(eps) ** power])
        W = np.linalg.pinv(X)[0]
        value = float(W @ np.array(est))
        stderr = float(math.sqrt(sum((w * s) ** 2 for w, s in zip(W, err))))
    # a divergent density (power <= 0) keeps growing as eps shrinks
    converged = power > 0 and (len(eps) < 2 or abs(est[-1] - est[-2])
                               <= 3 * math.hypot(err[-1], err[-2]) + 0.02 * abs(est[-1]))
    return SingularIntegral(float(value), float(stderr), tuple(eps), tuple(float(v) for v in est),
                            tuple(err), samples, seed, "monte-carlo", bool(converged), float(power))


# --------------------------------------------------------------------------
# fitting

@dataclass(frozen=True)
class CountFit:
    P_values: tuple[Fraction, ...]
    counts: tuple[int, ...]
    method: str
    expected_exponent: int
    fitted_exponent: float
    c_fit: float
    c_naive: float
    degenerate: bool
    c_pred: float | None = None
    series: SingularSeries | None = None
    integral: SingularIntegral | None = None
    relative_gap: float | None = None
    prediction_reliable: bool | None = None


def _count(S: FormSystem, P, box, method: str, budget: int) -> tuple[int, str]:
    if method == "auto":
        method = "box"
        if S.R == 1:
            try:
                auto_split(S.forms[0])
                method = "split"
            except ValueError:
                pass
    if method == "split":
        return count_zeros_split(S.forms[0], P, box=box, budget=budget), method
    if method == "box":
        return count_zeros_box(S, P, box, budget), method
    raise ValueError(f"unknown counting method {method!r}")


def fit_leading_term(S: FormSystem | HomogeneousForm, P_list: Sequence, box: Box | None = None,
                     method: str = "auto", budget: int = DEFAULT_COUNT_BUDGET,
                     predict: bool = False, qmax: int = 50,
                     eps_list: Sequence[float] = (0.02, 0.01, 0.005),
                     samples: int = 4_000_000, seed: int = 0) -> CountFit:
    """Fit N(P) ~ c P^{n-d}.

    The exponent is the log-log slope over counts N > 0.  The constant is
    the intercept of N / P^{n-d} = c + c'/P, which absorbs the first
    lower-order term at desk-scale P.
    """
    S = as_system(S)
    Ps = sorted(param_fraction(p) for p in P_list)
    if len(Ps) < 4:
        raise ValueError("need at least four values of P")
    box = box or Box.symmetric(S.n)
    counts, used = [], None
    for P in Ps:
        c, used = _count(S, P, box, method, budget)
        counts.append(c)
    e = S.n - S.d * S.R
    pos = [(float(P), c) for P, c in zip(Ps, counts) if c > 0]
    degenerate = len(pos) < 2 or len({c for _, c in pos}) == 1
    if degenerate:
        slope = 0.0
    else:
        lx = np.log([p for p, _ in pos])
        ly = np.log([c for _, c in pos])
        slope = float(np.polyfit(lx, ly, 1)[0])
    xs = np.array([1.0 / float(P) for P in Ps])
    ys = np.array([c / float(P) ** e for P, c in zip(Ps, counts)])
    c_fit = float(np.polyfit(xs, ys, 1)[1])
    c_naive = float(ys[-1])
    out = dict(P_values=tuple(Ps), counts=tuple(counts), method=used, expected_exponent=e,
               fitted_exponent=slope, c_fit=c_fit, c_naive=c_naive, degenerate=degenerate)
    if predict:
        ser = truncated_singular_series(S, qmax)
        J = singular_integral(S, box, eps_list, samples, seed)
        c_pred = ser.value * J.value
        gap = abs(c_fit - c_pred) / abs(c_pred) if c_pred else math.inf
        out.update(c_pred=c_pred, series=ser, integral=J, relative_gap=gap,
                   prediction_reliable=ser.stable and J.converged)
    return CountFit(**out)
