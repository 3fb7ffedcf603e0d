"""Exact integer matrix primitives.

Everything here works on Python integers.  Ranks and determinants use
fraction-free (Bareiss) elimination; the integer kernel is read off a
unimodular column reduction, which makes it saturated by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class IntegerMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(v) for v in self.entries)
        object.__setattr__(self, "entries", entries)
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative shape")
        if len(entries) != self.rows * self.cols:
            raise ValueError("entries length must equal rows*cols")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntegerMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), cols, tuple(v for r in rows for v in r))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntegerMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def tolist(self) -> list[list[int]]:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    @property
    def T(self) -> "IntegerMatrix":
        return IntegerMatrix(
            self.cols, self.rows,
            tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)))

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        a, b = self.tolist(), other.tolist()
        out = [[sum(a[i][k] * b[k][j] for k in range(self.cols)) for j in range(other.cols)]
               for i in range(self.rows)]
        return IntegerMatrix.from_rows(out, other.cols)

    def apply(self, v: Sequence[int]) -> list[int]:
        c = self.cols
        return [sum(self.entries[i * c + j] * v[j] for j in range(c)) for i in range(self.rows)]

    def columns(self, idx: Iterable[int]) -> "IntegerMatrix":
        idx = list(idx)
        rows = self.tolist()
        return IntegerMatrix.from_rows([[r[j] for j in idx] for r in rows], len(idx))

    def content(self) -> int:
        return math.gcd(*self.entries) if self.entries else 0


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if p % q == 0:
            return p == q
    # Miller-Rabin with these bases is deterministic below 3.3e24.
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if a % p == 0:
            continue
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def _bareiss(a: list[list[int]]) -> tuple[int, int]:
    """In-place fraction-free elimination; returns (rank, signed last pivot).

    For a square nonsingular input the second value is the determinant.
    """
    m = len(a)
    ncols = len(a[0]) if m else 0
    prev = 1
    sign = 1
    r = 0
    for c in range(ncols):
        if r == m:
            break
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
            sign = -sign
        p = a[r][c]
        for i in range(r + 1, m):
            f = a[i][c]
            row_i, row_r = a[i], a[r]
            for j in range(c + 1, ncols):
                row_i[j] = (p * row_i[j] - f * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        r += 1
    return r, sign * prev


def rank_rational(M: IntegerMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return _bareiss(M.tolist())[0]


def determinant(M: IntegerMatrix) -> int:
    if M.rows != M.cols:
        raise ValueError("determinant of a non-square matrix")
    if M.rows == 0:
        return 1
    r, last = _bareiss(M.tolist())
    return last if r == M.rows else 0


def rank_mod_p(M: IntegerMatrix, p: int) -> int:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    a = [[v % p for v in row] for row in M.tolist()]
    m, n = M.rows, M.cols
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], p - 2, p)
        row_r = [v * inv % p for v in a[r]]
        a[r] = row_r
        for i in range(r + 1, m):
            f = a[i][c]
            if f:
                a[i] = [(x - f * y) % p for x, y in zip(a[i], row_r)]
        r += 1
    return r


def adjugate(M: IntegerMatrix) -> IntegerMatrix:
    """Cofactor matrix C with ``M @ C.T == det(M) * I == C @ M.T``."""
    n = M.rows
    if M.cols != n:
        raise ValueError("adjugate of a non-square matrix")
    if n == 1:
        return IntegerMatrix(1, 1, (1,))
    rows = M.tolist()
    out = []
    for i in range(n):
        line = []
        for j in range(n):
            minor = [[rows[a][b] for b in range(n) if b != j] for a in range(n) if a != i]
            line.append((-1) ** (i + j) * determinant(IntegerMatrix.from_rows(minor, n - 1)))
        out.append(line)
    return IntegerMatrix.from_rows(out, n)


# --------------------------------------------------------------------------
# integer kernel

@dataclass(frozen=True)
class KernelBasis:
    n: int
    vectors: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.vectors)


def _size_reduce(vecs: list[list[int]]) -> list[list[int]]:
    """Pairwise reduction: subtract rounded projections until nothing shrinks."""
    changed = True
    while changed:
        changed = False
        for i in range(len(vecs)):
            for j in range(len(vecs)):
                if i == j:
                    continue
                bj = vecs[j]
                nj = sum(v * v for v in bj)
                if not nj:
                    continue
                dot = sum(a * b for a, b in zip(vecs[i], bj))
                k = round_half_even(dot, nj)
                if k:
                    cand = [a - k * b for a, b in zip(vecs[i], bj)]
                    if sum(v * v for v in cand) < sum(v * v for v in vecs[i]):
                        vecs[i] = cand
                        changed = True
    return vecs


def round_half_even(num: int, den: int) -> int:
    q, r = divmod(num, den)
    twice = 2 * r
    if twice > den or (twice == den and q % 2):
        q += 1
    return q


def kernel_basis(M: IntegerMatrix) -> KernelBasis:
    """Saturated basis of {y in Z^n : M y = 0}.

    Column operations by 2x2 unimodular blocks (extended gcd) bring M to
    ``M U = [H | 0]``; the trailing columns of U span the integer kernel
    exactly because U is invertible over Z.
    """
    n = M.cols
    a = M.tolist()
    U = [[int(i == j) for j in range(n)] for i in range(n)]  # columns are U's columns

    def colop(j, k, p, q, r, s):
        # (col_j, col_k) <- (p col_j + q col_k, r col_j + s col_k)
        for row in a:
            x, y = row[j], row[k]
            row[j], row[k] = p * x + q * y, r * x + s * y
        for row in U:
            x, y = row[j], row[k]
            row[j], row[k] = p * x + q * y, r * x + s * y

    piv = 0
    for i in range(M.rows):
        if piv == n:
            break
        for k in range(piv + 1, n):
            x, y = a[i][piv], a[i][k]
            if y == 0:
                continue
            g, s, t = _xgcd(x, y)
            # [x y] [[s, -y/g], [t, x/g]] = [g 0], determinant 1
            colop(piv, k, s, t, -y // g, x // g)
        if a[i][piv] != 0:
            piv += 1
    vecs = [[U[r][c] for r in range(n)] for c in range(piv, n)]
    vecs = _size_reduce(vecs)
    out = []
    for v in vecs:
        lead = next((x for x in v if x), 0)
        out.append(tuple(-x for x in v) if lead < 0 else tuple(v))
    return KernelBasis(n, tuple(out))


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """g, s, t with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def hermite_rows(vecs: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[int]]:
    """Row-style echelon form of a lattice basis by unimodular row operations.

    Returns the echelon rows (positive pivots, zeros left of each pivot) and
    the pivot columns.  Same lattice as the input.
    """
    rows = [list(v) for v in vecs]
    n = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(n):
        if r == len(rows):
            break
        for i in range(r + 1, len(rows)):
            while rows[i][c]:
                q = rows[r][c] // rows[i][c]
                rows[r] = [x - q * y for x, y in zip(rows[r], rows[i])]
                rows[r], rows[i] = rows[i], rows[r]
        if rows[r][c] == 0:
            continue
        if rows[r][c] < 0:
            rows[r] = [-x for x in rows[r]]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def enumerate_lattice_box(vecs: Sequence[Sequence[int]], B: int):
    """Yield every point of the lattice spanned by ``vecs`` with sup-norm <= B.

    Depth-first over the echelon basis: choosing the i-th coefficient fixes
    every coordinate before the next pivot, and those are checked at once.
    """
    n = len(vecs[0]) if vecs else 0
    if not vecs:
        return
    rows, pivots = hermite_rows(vecs)
    k = len(rows)
    bounds = pivots[1:] + [n]

    def rec(level, partial):
        if level == k:
            yield tuple(partial)
            return
        row, c = rows[level], pivots[level]
        h = row[c]
        base = partial[c]
        lo = -((B + base) // h)        # ceil((-B - base) / h)
        hi = (B - base) // h
        for t in range(lo, hi + 1):
            cand = [x + t * y for x, y in zip(partial, row)]
            if all(-B <= cand[j] <= B for j in range(c, bounds[level])):
                yield from rec(level + 1, cand)

    yield from rec(0, [0] * n)


def count_lattice_box(vecs: Sequence[Sequence[int]], n: int, B: int) -> int:
    if not vecs:
        return 1
    return sum(1 for _ in enumerate_lattice_box(vecs, B))


def count_kernel_points_in_box(M: IntegerMatrix, B: int) -> int:
    """#{y in Z^n : |y|_inf <= B, M y = 0}."""
    if B < 0:
        raise ValueError("B must be non-negative")
    kb = kernel_basis(M)
    if kb.dim == M.cols:
        return (2 * B + 1) ** M.cols
    return count_lattice_box(kb.vectors, M.cols, B)
