"""The two worked example families and their verification matrix."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .forms import HomogeneousForm
from .strata import (DEFAULT_PRIMES, DimensionEstimate, HessianReport, hessian_invariant,
                     singular_locus_dim)


@dataclass(frozen=True)
class ExampleSpec:
    family: str                     # "example1" or "example2"
    m: int
    d: int
    k: int = 0
    a: tuple[int, ...] = ()
    b: tuple[int, ...] = ()

    def __post_init__(self):
        a = tuple(self.a) or (1,) * self.m
        object.__setattr__(self, "a", a)
        if self.family == "example1":
            b = tuple(self.b) or (1,) * self.k
            object.__setattr__(self, "b", b)
            if self.d <= 1:
                raise ValueError("example1 needs d > 1")
            if self.k < 0 or len(b) != self.k:
                raise ValueError("example1 needs k >= 0 and len(b) == k")
        elif self.family == "example2":
            if self.d <= 3:
                raise ValueError("example2 needs d > 3")
            if self.k or self.b:
                raise ValueError("example2 has no k or b parameters")
        else:
            raise ValueError(f"unknown family {self.family!r}")
        if self.m < 0 or len(a) != self.m:
            raise ValueError("need m >= 0 and len(a) == m")
        if any(v == 0 for v in a + tuple(self.b)):
            raise ValueError("coefficients must be nonzero")
        if self.n == 0:
            raise ValueError("the form has no variables")

    @property
    def n(self) -> int:
        return 2 * self.m + self.k

    @property
    def degree(self) -> int:
        return 2 * self.d if self.family == "example1" else self.d

    @property
    def name(self) -> str:
        if self.family == "example1":
            return f"example1(m={self.m},k={self.k},d={self.d})"
        return f"example2(m={self.m},d={self.d})"

    def form(self) -> HomogeneousForm:
        return example1_form(self) if self.family == "example1" else example2_form(self)


def example1_form(spec: ExampleSpec) -> HomogeneousForm:
    """sum_j a_j x_{2j-1}^d x_{2j}^d + sum_i b_i x_{2m+i}^{2d}."""
    if spec.family != "example1":
        raise ValueError("not an example1 spec")
    n, d, m = spec.n, spec.d, spec.m
    terms = {}
    for j, aj in enumerate(spec.a):
        e = [0] * n
        e[2 * j] = e[2 * j + 1] = d
        terms[tuple(e)] = aj
    for i, bi in enumerate(spec.b):
        e = [0] * n
        e[2 * m + i] = 2 * d
        terms[tuple(e)] = bi
    return HomogeneousForm(n, 2 * d, terms)


def example2_form(spec: ExampleSpec) -> HomogeneousForm:
    """d times sum_j a_j (x_{2j-1} x_{2j}^{d-1} - x_{2j-1}^d / d), which has integer coefficients."""
    if spec.family != "example2":
        raise ValueError("not an example2 spec")
    n, d = spec.n, spec.d
    terms = {}
    for j, aj in enumerate(spec.a):
        e1 = [0] * n
        e1[2 * j], e1[2 * j + 1] = 1, d - 1
        e2 = [0] * n
        e2[2 * j] = d
        terms[tuple(e1)] = d * aj
        terms[tuple(e2)] = -aj
    return HomogeneousForm(n, d, terms)


@dataclass(frozen=True)
class ExampleReport:
    name: str
    form: str
    expected_H: int
    expected_dimV: int
    hessian: HessianReport
    singular: DimensionEstimate
    primes: tuple[int, ...]
    notes: tuple[str, ...] = field(default=())

    @property
    def H(self) -> int:
        return self.hessian.value

    @property
    def dimV(self) -> int:
        return -1 if self.singular.dim is None else self.singular.dim

    @property
    def agreement(self) -> bool:
        return self.hessian.agreement and self.singular.agreement

    @property
    def H_ok(self) -> bool:
        return self.H == self.expected_H

    @property
    def dimV_ok(self) -> bool:
        return self.dimV == self.expected_dimV

    @property
    def inequality_ok(self) -> bool:
        return self.H <= self.dimV

    @property
    def passed(self) -> bool:
        return self.H_ok and self.dimV_ok and self.agreement


def verify_example(F: HomogeneousForm, expected_H: int, expected_dimV: int,
                   primes: Sequence[int] = DEFAULT_PRIMES, name: str | None = None) -> ExampleReport:
    primes = tuple(primes)
    return ExampleReport(
        name=name or str(F), form=str(F), expected_H=expected_H, expected_dimV=expected_dimV,
        hessian=hessian_invariant(F, primes), singular=singular_locus_dim(F, primes),
        primes=primes)


# instances and the stated values of 𝓗 and dim V*
VERIFICATION_MATRIX: tuple[tuple[ExampleSpec, int, int], ...] = (
    (ExampleSpec("example1", m=1, k=1, d=2), 0, 1),
    (ExampleSpec("example1", m=2, k=1, d=2), 0, 2),
    (ExampleSpec("example1", m=1, k=2, d=2), 0, 1),
    (ExampleSpec("example2", m=1, d=4), 0, 1),
    (ExampleSpec("example2", m=2, d=4), 0, 2),
)


def run_matrix(only: str | None = None, primes: Sequence[int] = DEFAULT_PRIMES,
               overrides: dict[str, tuple[int, int]] | None = None) -> list[ExampleReport]:
    """Verify every matrix instance whose name starts with ``only``.

    ``overrides`` maps an instance name to replacement (H, dimV) expectations.
    """
    out = []
    for spec, h, dv in VERIFICATION_MATRIX:
        if only and not spec.name.startswith(only):
            continue
        if overrides and spec.name in overrides:
            h, dv = overrides[spec.name]
        out.append(verify_example(spec.form(), h, dv, primes, spec.name))
    return out
