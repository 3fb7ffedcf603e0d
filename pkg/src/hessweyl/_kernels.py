"""Hot enumeration kernels, each with a numba and a pure-numpy implementation.

The backend is chosen at import time: numba when it imports and the
environment variable ``HESSWEYL_DISABLE_NUMBA`` is unset (or ``0``), numpy
otherwise.  :func:`set_backend` switches at runtime, which the tests and the
benchmark use to compare both paths on the same inputs.

All kernels take plain int64 arrays.  Callers are responsible for checking
that intermediate integers stay below 2**62 (see ``fits_int64``); beyond that
they fall back to exact Python integers.

Enumeration order is fixed (last coordinate fastest) and floating partial
sums are formed per fixed-size chunk, so results do not depend on the
number of threads.
"""
from __future__ import annotations

import math
import os

import numpy as np

# the default TBB probe warns on older TBB builds; OpenMP is always shipped
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    import numba
    from numba import njit, prange
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

CHUNK = 1 << 15
INT64_SAFE = 1 << 62

_disabled = os.environ.get("HESSWEYL_DISABLE_NUMBA", "").strip() not in ("", "0")
_backend = "numba" if HAVE_NUMBA and not _disabled else "numpy"


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not available")
    _backend = name


def set_threads(k: int) -> int:
    """Cap the numba worker count; returns the value actually used."""
    if not HAVE_NUMBA:
        return 1
    k = max(1, min(int(k), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(k)
    return k


def fits_int64(bound: int) -> bool:
    return bound < INT64_SAFE


def inverse_table(p: int) -> np.ndarray:
    inv = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        inv[a] = pow(a, p - 2, p)
    return inv


# ==========================================================================
# numba implementations

if HAVE_NUMBA:

    @njit(cache=True)
    def _rank_mod_p_nb(mat, p, inv):
        rows, cols = mat.shape
        r = 0
        for c in range(cols):
            if r == rows:
                break
            piv = -1
            for i in range(r, rows):
                if mat[i, c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for j in range(cols):
                    tmp = mat[r, j]
                    mat[r, j] = mat[piv, j]
                    mat[piv, j] = tmp
            iv = inv[mat[r, c]]
            for j in range(c, cols):
                mat[r, j] = mat[r, j] * iv % p
            for i in range(r + 1, rows):
                f = mat[i, c]
                if f != 0:
                    for j in range(c, cols):
                        mat[i, j] = (mat[i, j] - f * mat[r, j]) % p
            r += 1
        return r

    @njit(cache=True)
    def _rank_hist_proj_nb(term_entry, term_coef, term_exp, nrows, ncols, maxd, p, inv):
        nv = term_exp.shape[1]
        T = term_entry.shape[0]
        hist = np.zeros(min(nrows, ncols) + 1, dtype=np.int64)
        x = np.zeros(nv, dtype=np.int64)
        pw = np.ones((nv, maxd + 1), dtype=np.int64)
        mat = np.zeros((nrows, ncols), dtype=np.int64)
        for lead in range(nv):
            total = 1
            for _ in range(nv - lead - 1):
                total *= p
            for idx in range(total):
                for j in range(lead):
                    x[j] = 0
                x[lead] = 1
                t = idx
                for j in range(nv - 1, lead, -1):
                    x[j] = t % p
                    t //= p
                for j in range(nv):
                    for e in range(1, maxd + 1):
                        pw[j, e] = pw[j, e - 1] * x[j] % p
                for a in range(nrows):
                    for b in range(ncols):
                        mat[a, b] = 0
                for k in range(T):
                    v = term_coef[k]
                    for j in range(nv):
                        e = term_exp[k, j]
                        if e != 0:
                            v = v * pw[j, e] % p
                    ent = term_entry[k]
                    a = ent // ncols
                    b = ent - a * ncols
                    mat[a, b] = (mat[a, b] + v) % p
                hist[_rank_mod_p_nb(mat, p, inv)] += 1
        return hist

    @njit(cache=True)
    def _eval_terms_nb(coef, exps, x, a=0, b=-1):
        # terms a..b-1 (all of them by default)
        if b < 0:
            b = coef.shape[0]
        s = 0
        for k in range(a, b):
            v = coef[k]
            for j in range(exps.shape[1]):
                for _ in range(exps[k, j]):
                    v *= x[j]
            s += v
        return s

    @njit(cache=True)
    def _step_box(x, lo, size):
        j = x.shape[0] - 1
        while j >= 0:
            x[j] += 1
            if x[j] < lo[j] + size[j]:
                return
            x[j] = lo[j]
            j -= 1

    @njit(cache=True)
    def _seek_box(x, lo, size, idx):
        for j in range(x.shape[0] - 1, -1, -1):
            x[j] = lo[j] + idx % size[j]
            idx //= size[j]

    @njit(cache=True)
    def _step_tuple(xs, B):
        k, n = xs.shape
        j = k * n - 1
        while j >= 0:
            s, i = j // n, j % n
            xs[s, i] += 1
            if xs[s, i] <= B:
                return
            xs[s, i] = -B
            j -= 1

    @njit(cache=True)
    def _seek_tuple(xs, B, idx):
        k, n = xs.shape
        base = 2 * B + 1
        for j in range(k * n - 1, -1, -1):
            xs[j // n, j % n] = idx % base - B
            idx //= base

    @njit(cache=True, parallel=True)
    def _count_common_zeros_nb(coef, exps, offs, lo, size):
        dim = lo.shape[0]
        total = 1
        for j in range(dim):
            total *= size[j]
        nchunks = (total + CHUNK - 1) // CHUNK
        parts = np.zeros(nchunks, dtype=np.int64)
        R = offs.shape[0] - 1
        for ch in prange(nchunks):
            x = np.zeros(dim, dtype=np.int64)
            start = ch * CHUNK
            stop = min(total, start + CHUNK)
            _seek_box(x, lo, size, start)
            cnt = 0
            for idx in range(start, stop):
                if idx > start:
                    _step_box(x, lo, size)
                ok = True
                for l in range(R):
                    if _eval_terms_nb(coef, exps, x, offs[l], offs[l + 1]) != 0:
                        ok = False
                        break
                if ok:
                    cnt += 1
            parts[ch] = cnt
        return parts.sum()

    @njit(cache=True, parallel=True)
    def _form_values_nb(coef, exps, lo, size):
        dim = lo.shape[0]
        total = 1
        for j in range(dim):
            total *= size[j]
        out = np.empty(total, dtype=np.int64)
        nchunks = (total + CHUNK - 1) // CHUNK
        for ch in prange(nchunks):
            x = np.zeros(dim, dtype=np.int64)
            start = ch * CHUNK
            stop = min(total, start + CHUNK)
            _seek_box(x, lo, size, start)
            for idx in range(start, stop):
                if idx > start:
                    _step_box(x, lo, size)
                out[idx] = _eval_terms_nb(coef, exps, x)
        return out

    @njit(cache=True)
    def _multilinear_nb(coef, var, xs, a=0, b=-1):
        # xs has shape (k, n); term value coef * prod_s xs[s, var[s]], terms a..b-1
        if b < 0:
            b = coef.shape[0]
        s = 0
        k = var.shape[1]
        for t in range(a, b):
            v = coef[t]
            for slot in range(k):
                v *= xs[slot, var[t, slot]]
                if v == 0:
                    break
            s += v
        return s

    @njit(cache=True, parallel=True)
    def _count_zero_tuples_nb(coef, var, offs, k, n, B):
        # offs delimits the terms of each of the n equations
        dim = k * n
        base = 2 * B + 1
        total = 1
        for _ in range(dim):
            total *= base
        nchunks = (total + CHUNK - 1) // CHUNK
        parts = np.zeros(nchunks, dtype=np.int64)
        neq = offs.shape[0] - 1
        for ch in prange(nchunks):
            xs = np.zeros((k, n), dtype=np.int64)
            start = ch * CHUNK
            stop = min(total, start + CHUNK)
            cnt = 0
            _seek_tuple(xs, B, start)
            for idx in range(start, stop):
                if idx > start:
                    _step_tuple(xs, B)
                ok = True
                for i in range(neq):
                    if _multilinear_nb(coef, var, xs, offs[i], offs[i + 1]) != 0:
                        ok = False
                        break
                if ok:
                    cnt += 1
            parts[ch] = cnt
        return parts.sum()

    @njit(cache=True, parallel=True)
    def _gamma_values_nb(coef, var, offs, k, n, B, start, count):
        # values[t, i] = sum of the terms of output i at outer tuple start+t
        neq = offs.shape[0] - 1
        out = np.zeros((count, neq), dtype=np.int64)
        nchunks = (count + CHUNK - 1) // CHUNK
        for ch in prange(nchunks):
            xs = np.zeros((k, n), dtype=np.int64)
            lo_ = ch * CHUNK
            hi_ = min(count, lo_ + CHUNK)
            _seek_tuple(xs, B, start + lo_)
            for r in range(lo_, hi_):
                if r > lo_:
                    _step_tuple(xs, B)
                for i in range(neq):
                    out[r, i] = _multilinear_nb(coef, var, xs, offs[i], offs[i + 1])
        return out

    @njit(cache=True)
    def _frac_fixed_nb(limbs, v):
        # frac(A * v / 2**96) for A = l2*2**64 + l1*2**32 + l0
        u = np.uint64(v)
        lo32 = u & np.uint64(0xFFFFFFFF)
        t2 = ((np.uint64(limbs[2]) * lo32) & np.uint64(0xFFFFFFFF)) / 4294967296.0
        t1 = (np.uint64(limbs[1]) * u) / 18446744073709551616.0
        t0 = (float(limbs[0]) * float(v)) / 7.922816251426434e28
        s = t2 + t1 + t0
        return s - math.floor(s)

    @njit(cache=True, parallel=True)
    def _exp_sum_nb(coef, exps, offs, lo, size, mode, num, Q, limbs):
        # mode 0: alpha_l = num[l]/Q exactly; mode 1: 96-bit fixed point limbs[l]
        dim = lo.shape[0]
        total = 1
        for j in range(dim):
            total *= size[j]
        nchunks = (total + CHUNK - 1) // CHUNK
        re_ = np.zeros(nchunks)
        im_ = np.zeros(nchunks)
        R = offs.shape[0] - 1
        twopi = 2.0 * math.pi
        for ch in prange(nchunks):
            x = np.zeros(dim, dtype=np.int64)
            start = ch * CHUNK
            stop = min(total, start + CHUNK)
            sr = 0.0
            si = 0.0
            _seek_box(x, lo, size, start)
            for idx in range(start, stop):
                if idx > start:
                    _step_box(x, lo, size)
                if mode == 0:
                    acc = 0
                    for l in range(R):
                        v = _eval_terms_nb(coef, exps, x, offs[l], offs[l + 1])
                        acc = (acc + num[l] * (v % Q)) % Q
                    ph = acc / Q
                else:
                    ph = 0.0
                    for l in range(R):
                        v = _eval_terms_nb(coef, exps, x, offs[l], offs[l + 1])
                        ph += _frac_fixed_nb(limbs[l], v)
                    ph -= math.floor(ph)
                sr += math.cos(twopi * ph)
                si += math.sin(twopi * ph)
            re_[ch] = sr
            im_[ch] = si
        return re_, im_

    @njit(cache=True, parallel=True)
    def _weyl_mask_nb(coef, var, offs, k, n, B, mode, num, Q, kmax, limbs, thr):
        # offs has R*n + 1 entries: block (l, i) holds Gamma_l(., e_i) terms
        dim = k * n
        base = 2 * B + 1
        total = 1
        for _ in range(dim):
            total *= base
        mask = np.zeros(total, dtype=np.uint8)
        R = (offs.shape[0] - 1) // n
        nchunks = (total + CHUNK - 1) // CHUNK
        for ch in prange(nchunks):
            xs = np.zeros((k, n), dtype=np.int64)
            start = ch * CHUNK
            stop = min(total, start + CHUNK)
            _seek_tuple(xs, B, start)
            for idx in range(start, stop):
                if idx > start:
                    _step_tuple(xs, B)
                ok = True
                for i in range(n):
                    if mode == 0:
                        acc = 0
                        for l in range(R):
                            b = l * n + i
                            v = _multilinear_nb(coef, var, xs, offs[b], offs[b + 1])
                            acc = (acc + num[l] * (v % Q)) % Q
                        dist = min(acc, Q - acc)
                        if dist > kmax:
                            ok = False
                            break
                    else:
                        ph = 0.0
                        for l in range(R):
                            b = l * n + i
                            v = _multilinear_nb(coef, var, xs, offs[b], offs[b + 1])
                            ph += _frac_fixed_nb(limbs[l], v)
                        ph -= math.floor(ph)
                        if min(ph, 1.0 - ph) > thr:
                            ok = False
                            break
                if ok:
                    mask[idx] = 1
        return mask


# ==========================================================================
# numpy implementations

def _decode_np(idx, lo, size):
    out = np.empty((idx.shape[0], len(size)), dtype=np.int64)
    t = idx.copy()
    for j in range(len(size) - 1, -1, -1):
        out[:, j] = lo[j] + t % size[j]
        t //= size[j]
    return out


def _rank_mod_p_batch_np(mats, p, inv):
    mats = mats % p
    nb, rows, cols = mats.shape
    rank = np.zeros(nb, dtype=np.int64)
    ar = np.arange(nb)
    rowidx = np.arange(rows)
    for c in range(cols):
        cand = (mats[:, :, c] != 0) & (rowidx[None, :] >= rank[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        piv = np.argmax(cand, axis=1)
        sel = ar[has]
        r = np.minimum(rank[sel], rows - 1)
        pr = piv[sel]
        top = mats[sel, r, :].copy()
        mats[sel, r, :] = mats[sel, pr, :]
        mats[sel, pr, :] = top
        pivrow = mats[sel, r, :] * inv[mats[sel, r, c]][:, None] % p
        mats[sel, r, :] = pivrow
        f = mats[sel, :, c].copy()
        f[np.arange(len(sel)), r] = 0
        below = rowidx[None, :] > r[:, None]
        f = np.where(below, f, 0)
        mats[sel] = (mats[sel] - f[:, :, None] * pivrow[:, None, :]) % p
        rank[sel] += 1
    return rank


def _rank_hist_proj_np(term_entry, term_coef, term_exp, nrows, ncols, maxd, p, inv):
    nv = term_exp.shape[1]
    hist = np.zeros(min(nrows, ncols) + 1, dtype=np.int64)
    for lead in range(nv):
        m = nv - lead - 1
        total = p**m
        for start in range(0, total, CHUNK):
            idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
            pts = np.zeros((idx.shape[0], nv), dtype=np.int64)
            pts[:, lead] = 1
            if m:
                pts[:, lead + 1:] = _decode_np(idx, np.zeros(m, np.int64), np.full(m, p, np.int64))
            pw = np.ones((idx.shape[0], nv, maxd + 1), dtype=np.int64)
            for e in range(1, maxd + 1):
                pw[:, :, e] = pw[:, :, e - 1] * pts % p
            mats = np.zeros((idx.shape[0], nrows * ncols), dtype=np.int64)
            for k in range(term_entry.shape[0]):
                v = np.full(idx.shape[0], term_coef[k], dtype=np.int64)
                for j in range(nv):
                    e = term_exp[k, j]
                    if e:
                        v = v * pw[:, j, e] % p
                mats[:, term_entry[k]] += v
            ranks = _rank_mod_p_batch_np(mats.reshape(-1, nrows, ncols), p, inv)
            hist += np.bincount(ranks, minlength=hist.shape[0])
    return hist


def _eval_terms_np(coef, exps, pts):
    s = np.zeros(pts.shape[0], dtype=np.int64)
    for k in range(coef.shape[0]):
        v = np.full(pts.shape[0], coef[k], dtype=np.int64)
        for j in range(exps.shape[1]):
            if exps[k, j]:
                v = v * pts[:, j] ** exps[k, j]
        s += v
    return s


def _box_chunks(lo, size):
    total = int(np.prod(size)) if len(size) else 1
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        yield _decode_np(idx, lo, size)


def _count_common_zeros_np(coef, exps, offs, lo, size):
    cnt = 0
    for pts in _box_chunks(lo, size):
        ok = np.ones(pts.shape[0], dtype=bool)
        for l in range(len(offs) - 1):
            sl = slice(offs[l], offs[l + 1])
            ok &= _eval_terms_np(coef[sl], exps[sl], pts) == 0
        cnt += int(ok.sum())
    return cnt


def _form_values_np(coef, exps, lo, size):
    parts = [_eval_terms_np(coef, exps, pts) for pts in _box_chunks(lo, size)]
    return np.concatenate(parts) if parts else np.zeros(0, np.int64)


def _multilinear_np(coef, var, xs):
    # xs: (batch, k, n)
    s = np.zeros(xs.shape[0], dtype=np.int64)
    for t in range(coef.shape[0]):
        v = np.full(xs.shape[0], coef[t], dtype=np.int64)
        for slot in range(var.shape[1]):
            v = v * xs[:, slot, var[t, slot]]
        s += v
    return s


def _tuple_chunks(k, n, B, start, stop):
    dim = k * n
    base = 2 * B + 1
    lo = np.full(dim, -B, np.int64)
    size = np.full(dim, base, np.int64)
    for s in range(start, stop, CHUNK):
        idx = np.arange(s, min(stop, s + CHUNK), dtype=np.int64)
        yield _decode_np(idx, lo, size).reshape(-1, k, n)


def _count_zero_tuples_np(coef, var, offs, k, n, B):
    total = (2 * B + 1) ** (k * n)
    cnt = 0
    for xs in _tuple_chunks(k, n, B, 0, total):
        ok = np.ones(xs.shape[0], dtype=bool)
        for i in range(len(offs) - 1):
            sl = slice(offs[i], offs[i + 1])
            ok &= _multilinear_np(coef[sl], var[sl], xs) == 0
        cnt += int(ok.sum())
    return cnt


def _gamma_values_np(coef, var, offs, k, n, B, start, count):
    neq = len(offs) - 1
    out = np.zeros((count, neq), dtype=np.int64)
    pos = 0
    for xs in _tuple_chunks(k, n, B, start, start + count):
        for i in range(neq):
            sl = slice(offs[i], offs[i + 1])
            out[pos:pos + xs.shape[0], i] = _multilinear_np(coef[sl], var[sl], xs)
        pos += xs.shape[0]
    return out


def _frac_fixed_np(limbs, v):
    u = v.astype(np.uint64)
    lo32 = u & np.uint64(0xFFFFFFFF)
    t2 = ((np.uint64(limbs[2]) * lo32) & np.uint64(0xFFFFFFFF)) / 4294967296.0
    t1 = (np.uint64(limbs[1]) * u) / 18446744073709551616.0
    t0 = (float(limbs[0]) * v.astype(np.float64)) / 7.922816251426434e28
    s = t2 + t1 + t0
    return s - np.floor(s)


def _exp_sum_np(coef, exps, offs, lo, size, mode, num, Q, limbs):
    re_, im_ = [], []
    R = len(offs) - 1
    for pts in _box_chunks(lo, size):
        if mode == 0:
            acc = np.zeros(pts.shape[0], dtype=np.int64)
            for l in range(R):
                sl = slice(offs[l], offs[l + 1])
                v = _eval_terms_np(coef[sl], exps[sl], pts)
                acc = (acc + num[l] * (v % Q)) % Q
            ph = acc / Q
        else:
            ph = np.zeros(pts.shape[0])
            for l in range(R):
                sl = slice(offs[l], offs[l + 1])
                ph += _frac_fixed_np(limbs[l], _eval_terms_np(coef[sl], exps[sl], pts))
            ph -= np.floor(ph)
        ang = 2.0 * math.pi * ph
        re_.append(math.fsum(np.cos(ang)))
        im_.append(math.fsum(np.sin(ang)))
    return np.array(re_), np.array(im_)


def _weyl_mask_np(coef, var, offs, k, n, B, mode, num, Q, kmax, limbs, thr):
    total = (2 * B + 1) ** (k * n)
    R = (len(offs) - 1) // n
    masks = []
    for xs in _tuple_chunks(k, n, B, 0, total):
        ok = np.ones(xs.shape[0], dtype=bool)
        for i in range(n):
            if mode == 0:
                acc = np.zeros(xs.shape[0], dtype=np.int64)
                for l in range(R):
                    b = l * n + i
                    v = _multilinear_np(coef[offs[b]:offs[b + 1]], var[offs[b]:offs[b + 1]], xs)
                    acc = (acc + num[l] * (v % Q)) % Q
                ok &= np.minimum(acc, Q - acc) <= kmax
            else:
                ph = np.zeros(xs.shape[0])
                for l in range(R):
                    b = l * n + i
                    v = _multilinear_np(coef[offs[b]:offs[b + 1]], var[offs[b]:offs[b + 1]], xs)
                    ph += _frac_fixed_np(limbs[l], v)
                ph -= np.floor(ph)
                ok &= np.minimum(ph, 1.0 - ph) <= thr
        masks.append(ok.astype(np.uint8))
    return np.concatenate(masks)


# ==========================================================================
# dispatch

def _pick(nb_name, np_impl):
    def call(*args):
        if _backend == "numba":
            return globals()[nb_name](*args)
        return np_impl(*args)
    call.__name__ = nb_name.strip("_").removesuffix("_nb")
    return call


rank_hist_projective = _pick("_rank_hist_proj_nb", _rank_hist_proj_np)
count_common_zeros = _pick("_count_common_zeros_nb", _count_common_zeros_np)
form_values = _pick("_form_values_nb", _form_values_np)
count_zero_tuples = _pick("_count_zero_tuples_nb", _count_zero_tuples_np)
gamma_values = _pick("_gamma_values_nb", _gamma_values_np)
exp_sum_parts = _pick("_exp_sum_nb", _exp_sum_np)
weyl_mask = _pick("_weyl_mask_nb", _weyl_mask_np)


# ==========================================================================
# packing helpers

def pack_forms(forms) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Concatenate the terms of several forms: (coef, exps, offsets)."""
    coefs, exps, offs = [], [], [0]
    n = forms[0].n
    for f in forms:
        for e, c in f.items():
            coefs.append(c)
            exps.append(e)
        offs.append(len(coefs))
    return (np.array(coefs, dtype=np.int64),
            np.array(exps, dtype=np.int64).reshape(-1, n),
            np.array(offs, dtype=np.int64))


def pack_multilinear(forms, k) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Concatenate multilinear expansions of degree-``k`` forms (zero forms allowed)."""
    coefs, var, offs = [], [], [0]
    for f in forms:
        if f:
            for c, order in f.multilinear_terms:
                coefs.append(c)
                var.append(order)
        offs.append(len(coefs))
    return (np.array(coefs, dtype=np.int64),
            np.array(var, dtype=np.int64).reshape(-1, k),
            np.array(offs, dtype=np.int64))


def value_bound(forms, B: int) -> int:
    """Upper bound on |F(x)| over |x|_inf <= B for every form given."""
    best = 0
    for f in forms:
        if f:
            best = max(best, sum(abs(c) for _, c in f.items()) * B**f.d)
    return best


def multilinear_bound(forms, B: int) -> int:
    best = 0
    for f in forms:
        if f:
            best = max(best, sum(abs(c) for c, _ in f.multilinear_terms) * B**f.d)
    return best
