"""Integer homogeneous forms, their derivatives and the associated multilinear form.

A form of degree ``d`` in ``n`` variables is stored sparsely as a map from
exponent vectors to nonzero Python integers.  The symmetric coefficient
tensor is never materialised; the multilinear form

    Gamma_F(x_1, ..., x_d) = d! * sum_j F_j x_{1,j_1} ... x_{d,j_d}

is evaluated by distributing each monomial's exponents over the ``d``
argument slots.  Placing a basis vector ``e_i`` in a slot is the same as
differentiating in ``x_i`` first, which is how the counting modules use it.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import FormParseError

Exponent = tuple[int, ...]


class ZeroForm:
    """The zero polynomial of a given shape; kept apart from HomogeneousForm."""

    __slots__ = ("n", "d")

    def __init__(self, n: int, d: int):
        self.n = n
        self.d = d

    terms: Mapping[Exponent, int] = {}

    def items(self):
        return ()

    def __bool__(self):
        return False

    def __eq__(self, other):
        return isinstance(other, ZeroForm) and (self.n, self.d) == (other.n, other.d)

    def __hash__(self):
        return hash(("zero", self.n, self.d))

    def __str__(self):
        return "0"

    def __repr__(self):
        return f"ZeroForm(n={self.n}, d={self.d})"


class HomogeneousForm:
    """Sparse integer homogeneous polynomial.

    Construction validates the exponent keys and drops nothing: passing a zero
    coefficient is an error.  Use :func:`make_form` when cancellation is
    possible and a :class:`ZeroForm` is an acceptable result.

    Derivatives of a form are again forms, of degree ``d - 1`` or ``d - 2``,
    so the class itself accepts any ``d >= 0``.  The paper-level degree
    restriction ``d >= 2`` is enforced by :func:`parse_form` and
    :class:`FormSystem`.
    """

    __slots__ = ("n", "d", "_terms", "_key", "__dict__")

    def __init__(self, n: int, d: int, terms: Mapping[Exponent, int]):
        if n < 1:
            raise ValueError("a form needs at least one variable")
        if d < 0:
            raise ValueError("negative degree")
        if not terms:
            raise ValueError("a HomogeneousForm must have at least one term; use ZeroForm")
        clean: dict[Exponent, int] = {}
        for exps, coef in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise ValueError(f"exponent vector {exps} has length != {n}")
            if min(exps) < 0 or sum(exps) != d:
                raise ValueError(f"exponent vector {exps} does not have total degree {d}")
            coef = int(coef)
            if coef == 0:
                raise ValueError("zero coefficients are not stored")
            clean[exps] = coef
        self.n = n
        self.d = d
        self._terms = clean
        self._key = tuple(sorted(clean.items(), reverse=True))

    @property
    def terms(self) -> dict[Exponent, int]:
        return dict(self._terms)

    def items(self) -> tuple[tuple[Exponent, int], ...]:
        """Terms in graded-lex order, leading monomial first."""
        return self._key

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        return (
            isinstance(other, HomogeneousForm)
            and self.n == other.n
            and self.d == other.d
            and self._key == other._key
        )

    def __hash__(self):
        return hash((self.n, self.d, self._key))

    def __neg__(self):
        return HomogeneousForm(self.n, self.d, {e: -c for e, c in self._terms.items()})

    def __str__(self):
        return format_form(self)

    def __repr__(self):
        return f"HomogeneousForm(n={self.n}, d={self.d}, {format_form(self)!r})"

    @cached_property
    def content(self) -> int:
        return math.gcd(*self._terms.values())

    @cached_property
    def variables(self) -> frozenset[int]:
        """0-based indices of the variables that actually occur."""
        return frozenset(i for e in self._terms for i, k in enumerate(e) if k)

    @cached_property
    def multilinear_terms(self) -> tuple[tuple[int, tuple[int, ...]], ...]:
        """Expansion of Gamma_F as ``(coef, (v_1, ..., v_d))`` pairs.

        ``Gamma_F(x_1..x_d) = sum coef * x_{1,v_1} * ... * x_{d,v_d}`` with
        0-based variable indices.  A monomial ``c*x^a`` contributes one entry
        per distinct ordering of its variable multiset, each with weight
        ``c * a!``.
        """
        out = []
        for exps, coef in self._key:
            weight = coef * math.prod(math.factorial(k) for k in exps)
            multiset = [i for i, k in enumerate(exps) for _ in range(k)]
            for order in sorted(set(itertools.permutations(multiset))):
                out.append((weight, order))
        return tuple(out)


Form = HomogeneousForm | ZeroForm


def make_form(n: int, d: int, terms: Mapping[Exponent, int]) -> Form:
    nonzero = {e: c for e, c in terms.items() if c}
    if not nonzero:
        return ZeroForm(n, d)
    return HomogeneousForm(n, d, nonzero)


@dataclass(frozen=True)
class FormSystem:
    """R forms sharing the same variable count and degree."""

    forms: tuple[HomogeneousForm, ...]

    def __post_init__(self):
        forms = tuple(self.forms)
        object.__setattr__(self, "forms", forms)
        if not forms:
            raise ValueError("a form system needs at least one form")
        for f in forms:
            if not isinstance(f, HomogeneousForm):
                raise TypeError("FormSystem members must be nonzero HomogeneousForm values")
        if len({f.n for f in forms}) != 1 or len({f.d for f in forms}) != 1:
            raise ValueError("all forms in a system must share n and d")
        if forms[0].d < 2:
            raise ValueError("forms must have degree d >= 2")

    @classmethod
    def of(cls, *forms: HomogeneousForm) -> "FormSystem":
        return cls(tuple(forms))

    @property
    def n(self) -> int:
        return self.forms[0].n

    @property
    def d(self) -> int:
        return self.forms[0].d

    @property
    def R(self) -> int:
        return len(self.forms)

    def __iter__(self):
        return iter(self.forms)

    def __len__(self):
        return len(self.forms)


def as_system(S: FormSystem | HomogeneousForm) -> FormSystem:
    return S if isinstance(S, FormSystem) else FormSystem((S,))


# --------------------------------------------------------------------------
# text format

_FACTOR = re.compile(r"x(\d+)(?:\^(\d+))?")
_COEF = re.compile(r"\d+")


def parse_form(text: str, n: int) -> HomogeneousForm:
    """Parse the form grammar, e.g. ``"3*x1^2*x2 - x3^3"``.

    Raises FormParseError on syntax errors, out-of-range variables, mixed
    degrees, degree below 2, or a result that cancels to zero.
    """
    s = "".join(text.split())
    if not s:
        raise FormParseError("empty form")
    pos = 0
    acc: dict[Exponent, int] = {}
    first = True
    while pos < len(s):
        sign = 1
        if s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos += 1
        elif not first:
            raise FormParseError(f"expected '+' or '-' at position {pos}")
        first = False
        coef = 1
        m = _COEF.match(s, pos)
        if m:
            coef = int(m.group())
            pos = m.end()
            if pos < len(s) and s[pos] == "*":
                pos += 1
        exps = [0] * n
        nfactors = 0
        while True:
            m = _FACTOR.match(s, pos)
            if not m:
                break
            k = int(m.group(1))
            if not 1 <= k <= n:
                raise FormParseError(f"variable x{k} out of range 1..{n}")
            exps[k - 1] += int(m.group(2)) if m.group(2) is not None else 1
            nfactors += 1
            pos = m.end()
            if pos < len(s) and s[pos] == "*":
                pos += 1
                if not _FACTOR.match(s, pos):
                    raise FormParseError(f"expected a factor at position {pos}")
            else:
                break
        if nfactors == 0:
            raise FormParseError(f"expected a factor x<k> at position {pos}")
        if pos < len(s) and s[pos] not in "+-":
            raise FormParseError(f"unexpected {s[pos]!r} at position {pos}")
        key = tuple(exps)
        acc[key] = acc.get(key, 0) + sign * coef
    degrees = {sum(e) for e in acc}
    if len(degrees) != 1:
        raise FormParseError(f"non-homogeneous input (degrees {sorted(degrees)})")
    d = degrees.pop()
    if d < 2:
        raise FormParseError(f"degree {d} < 2")
    form = make_form(n, d, acc)
    if not form:
        raise FormParseError("form is zero after collecting terms")
    return form


def format_form(F: Form) -> str:
    if not F:
        return "0"
    parts = []
    for exps, coef in F.items():
        factors = [f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(exps) if k]
        mag = abs(coef)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = f"{mag}*" + "*".join(factors)
        if not parts:
            parts.append(("-" if coef < 0 else "") + body)
        else:
            parts.append(("- " if coef < 0 else "+ ") + body)
    return " ".join(parts)


# --------------------------------------------------------------------------
# arithmetic

def evaluate(F: Form, x: Sequence[int]) -> int:
    if len(x) != F.n:
        raise ValueError(f"point has length {len(x)}, form has {F.n} variables")
    if not F:
        return 0
    x = [int(v) for v in x]
    total = 0
    for exps, coef in F.items():
        term = coef
        for v, k in zip(x, exps):
            if k:
                term *= v**k
        total += term
    return total


def partial(F: Form, i: int) -> Form:
    """Formal derivative in the variable ``x_i`` (1-based)."""
    if not 1 <= i <= F.n:
        raise IndexError(f"variable index {i} out of range 1..{F.n}")
    if not F or F.d == 0:
        return ZeroForm(F.n, max(F.d - 1, 0))
    k = i - 1
    out: dict[Exponent, int] = {}
    for exps, coef in F.items():
        if exps[k]:
            e = list(exps)
            e[k] -= 1
            out[tuple(e)] = coef * exps[k]
    return make_form(F.n, F.d - 1, out)


def hessian_entry(F: Form, a: int, b: int) -> Form:
    return partial(partial(F, a), b)


def hessian_matrix(F: Form) -> list[list[Form]]:
    n = F.n
    return [[hessian_entry(F, a, b) for b in range(1, n + 1)] for a in range(1, n + 1)]


def gradient(F: Form) -> list[Form]:
    return [partial(F, i) for i in range(1, F.n + 1)]


def symmetric_coeff(F: Form, j: Sequence[int]) -> Fraction:
    """Symmetric tensor entry F_j for a 1-based index tuple of length d."""
    if len(j) != F.d:
        raise ValueError(f"index tuple must have length d={F.d}")
    exps = [0] * F.n
    for idx in j:
        if not 1 <= idx <= F.n:
            raise IndexError(f"index {idx} out of range 1..{F.n}")
        exps[idx - 1] += 1
    if not F:
        return Fraction(0)
    coef = F._terms.get(tuple(exps), 0)
    return Fraction(coef * math.prod(math.factorial(k) for k in exps), math.factorial(F.d))


def _check_slots(F: Form, xs: Sequence[Sequence[int]]):
    if len(xs) != F.d:
        raise ValueError(f"expected {F.d} vectors, got {len(xs)}")
    for x in xs:
        if len(x) != F.n:
            raise ValueError(f"vector of length {len(x)}, form has {F.n} variables")


def gamma_eval(F: Form, xs: Sequence[Sequence[int]]) -> int:
    """Gamma_F(x_1, ..., x_d); always an exact integer."""
    _check_slots(F, xs)
    if not F:
        return 0
    xs = [[int(v) for v in x] for x in xs]
    total = 0
    for coef, order in F.multilinear_terms:
        term = coef
        for slot, v in enumerate(order):
            term *= xs[slot][v]
            if not term:
                break
        total += term
    return total


def gamma_via_polarization(F: Form, xs: Sequence[Sequence[int]]) -> int:
    """Same value as :func:`gamma_eval` by inclusion-exclusion over subsets."""
    _check_slots(F, xs)
    d, n = F.d, F.n
    total = 0
    for size in range(1, d + 1):
        sign = -1 if (d - size) % 2 else 1
        for subset in itertools.combinations(range(d), size):
            point = [sum(xs[s][i] for s in subset) for i in range(n)]
            total += sign * evaluate(F, point)
    return total


def linear_combination(forms: Sequence[Form], coeffs: Sequence[int]) -> Form:
    if len(forms) != len(coeffs):
        raise ValueError("coefficient vector length does not match the number of forms")
    n, d = forms[0].n, forms[0].d
    acc: dict[Exponent, int] = {}
    for f, c in zip(forms, coeffs):
        if not c or not f:
            continue
        for e, v in f.items():
            acc[e] = acc.get(e, 0) + c * v
    return make_form(n, d, acc)


def pencil_combine(S: FormSystem, c: Sequence[int]) -> Form:
    if len(c) != S.R:
        raise ValueError(f"need {S.R} coefficients, got {len(c)}")
    return linear_combination(S.forms, [int(v) for v in c])


def scale(F: Form, c: int) -> Form:
    return linear_combination([F], [c])


def permute_variables(F: Form, perm: Sequence[int]) -> Form:
    """Substitute x_i -> x_{perm[i]} (0-based positions)."""
    if not F:
        return F
    out = {}
    for exps, coef in F.items():
        e = [0] * F.n
        for i, k in enumerate(exps):
            e[perm[i]] = k
        out[tuple(e)] = coef
    return HomogeneousForm(F.n, F.d, out)


# --------------------------------------------------------------------------
# variable blocks

def variable_blocks(forms: Iterable[Form], n: int) -> list[tuple[int, ...]]:
    """Connected components of the 'share a monomial' graph on variables.

    Every form in ``forms`` splits as a sum of forms on disjoint blocks, so
    Hessians are block diagonal and gradients vanish blockwise.  Variables
    that never occur form singleton blocks.
    """
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for f in forms:
        if not f:
            continue
        for exps, _ in f.items():
            vs = [i for i, k in enumerate(exps) if k]
            for v in vs[1:]:
                ra, rb = find(vs[0]), find(v)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def restrict(F: Form, block: Sequence[int]) -> Form:
    """The part of F supported on ``block``, as a form in len(block) variables."""
    m = len(block)
    if not F:
        return ZeroForm(m, F.d)
    inside = set(block)
    out = {}
    for exps, coef in F.items():
        if all(k == 0 or i in inside for i, k in enumerate(exps)):
            out[tuple(exps[i] for i in block)] = coef
    return make_form(m, F.d, out)
