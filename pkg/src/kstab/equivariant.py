"""Molien series of finite matrix groups and S_k-invariant parts of virtual characters."""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

import sympy

from .errors import DomainError, EnumerationLimitError, GroupClosureError, ParseError
from .inertia import CycleType, centralizer_order, cycle_type, partitions

Matrix = tuple[tuple[Fraction, ...], ...]


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    m = tuple(tuple(Fraction(x) for x in row) for row in rows)
    if not m or any(len(row) != len(m) for row in m):
        raise DomainError("matrices must be square and nonempty")
    return m


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return tuple(tuple(sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class MatrixGroup:
    elements: tuple[Matrix, ...]

    def __post_init__(self):
        elems = tuple(dict.fromkeys(as_matrix(e) for e in self.elements))
        object.__setattr__(self, "elements", elems)
        if not elems:
            raise GroupClosureError("a group needs at least the identity")
        n = len(elems[0])
        if any(len(e) != n for e in elems):
            raise GroupClosureError("elements have different sizes")
        pool = set(elems)
        if identity(n) not in pool:
            raise GroupClosureError("identity missing")
        for a in elems:
            for b in elems:
                if matmul(a, b) not in pool:
                    raise GroupClosureError("element list is not closed under products")
        # finite and closed implies inverses are present

    @property
    def dim(self) -> int:
        return len(self.elements[0])

    @property
    def order(self) -> int:
        return len(self.elements)

    @classmethod
    def generated_by(cls, gens: Sequence, limit: int = 10_000) -> "MatrixGroup":
        gens = [as_matrix(g) for g in gens]
        found = {identity(len(gens[0]))}
        frontier = list(found)
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    p = matmul(a, g)
                    if p not in found:
                        found.add(p)
                        nxt.append(p)
                        if len(found) > limit:
                            raise GroupClosureError(f"generated group exceeds {limit} elements")
            frontier = nxt
        return cls(tuple(sorted(found)))


def s3_standard() -> MatrixGroup:
    """Reflection representation of S_3 on the root lattice, in integer matrices."""
    return MatrixGroup.generated_by([[[-1, 1], [0, 1]], [[1, 0], [1, -1]]])


def trivial_group(n: int = 2) -> MatrixGroup:
    return MatrixGroup((identity(n),))


def sign_group(n: int = 2) -> MatrixGroup:
    return MatrixGroup.generated_by([[[-int(i == j) for j in range(n)] for i in range(n)]])


NAMED_GROUPS = {"s3-standard": s3_standard, "trivial": trivial_group, "pm-identity": sign_group}


def named_group(name: str) -> MatrixGroup:
    try:
        return NAMED_GROUPS[name]()
    except KeyError:
        raise DomainError(f"unknown group {name!r}; choose from {sorted(NAMED_GROUPS)}") from None


def char_coefficients(a: Matrix) -> list[Fraction]:
    """e_0..e_n with det(1 - q a) = sum (-1)^k e_k q^k (Faddeev-LeVerrier)."""
    n = len(a)
    coeffs = [Fraction(1)]  # c_k of det(tI - a) = sum c_k t^(n-k)
    m = identity(n)
    for k in range(1, n + 1):
        am = matmul(a, m)
        c = -sum((am[i][i] for i in range(n)), Fraction(0)) / k
        coeffs.append(c)
        m = tuple(tuple(am[i][j] + (c if i == j else 0) for j in range(n)) for i in range(n))
    return [c * (-1) ** k for k, c in enumerate(coeffs)]


def symmetric_power_traces(a: Matrix, N: int) -> list[Fraction]:
    """Trace of a on Sym^d, d = 0..N, via h_d = sum_k (-1)^(k+1) e_k h_(d-k)."""
    e = char_coefficients(a)
    h = [Fraction(1)]
    for d in range(1, N + 1):
        h.append(sum(((-1) ** (k + 1) * e[k] * h[d - k] for k in range(1, min(d, len(e) - 1) + 1)), Fraction(0)))
    return h


def molien_series(G: MatrixGroup, N: int) -> list[Fraction]:
    if N < 0:
        raise DomainError("truncation must be >= 0")
    total = [Fraction(0)] * (N + 1)
    for g in G.elements:
        for d, h in enumerate(symmetric_power_traces(g, N)):
            total[d] += h
    return [c / G.order for c in total]


# -- rational functions in q ---------------------------------------------------------


def parse_rational_function(text: str) -> tuple[list[Fraction], list[Fraction]]:
    """``"1/((1-q^2)(1-q^3))"`` to ascending coefficient lists (numerator, denominator)."""
    q = sympy.Symbol("q")
    try:
        expr = sympy.parse_expr(
            text.replace("^", "**"),
            local_dict={"q": q},
            transformations=sympy.parsing.sympy_parser.standard_transformations
            + (sympy.parsing.sympy_parser.implicit_multiplication,),
        )
    except Exception as exc:  # sympy raises a zoo of types here
        raise ParseError(f"cannot parse rational function {text!r}: {exc}", 0) from None
    if expr.free_symbols - {q}:
        raise ParseError(f"only the variable q is allowed in {text!r}", 0)
    num, den = sympy.fraction(sympy.together(expr))

    def coeffs(p):
        poly = sympy.Poly(sympy.expand(p), q)
        out = [Fraction(0)] * (poly.degree() + 1)
        for (k,), c in poly.terms():
            out[k] = Fraction(int(sympy.numer(c)), int(sympy.denom(c)))
        return out

    return coeffs(num), coeffs(den)


def series_expand(num: Sequence, den: Sequence, N: int) -> list[Fraction]:
    num = [Fraction(c) for c in num]
    den = [Fraction(c) for c in den]
    if not den or den[0] == 0:
        raise ZeroDivisionError("denominator has zero constant term")
    out: list[Fraction] = []
    for d in range(N + 1):
        acc = num[d] if d < len(num) else Fraction(0)
        acc -= sum((den[k] * out[d - k] for k in range(1, min(d, len(den) - 1) + 1)), Fraction(0))
        out.append(acc / den[0])
    return out


def series_compare(coeffs: Sequence, rational_function, N: int) -> bool:
    if isinstance(rational_function, str):
        rational_function = parse_rational_function(rational_function)
    num, den = rational_function
    if len(coeffs) < N + 1:
        return False
    return [Fraction(c) for c in coeffs[: N + 1]] == series_expand(num, den, N)


# -- virtual characters of S_k -------------------------------------------------------


@dataclass(frozen=True)
class VirtualCharacter:
    k: int
    values: tuple[tuple[CycleType, Fraction], ...]

    def __post_init__(self):
        vals = {}
        for ct, v in dict(self.values).items():
            ct = ct if isinstance(ct, CycleType) else CycleType.from_parts(ct)
            if ct.d != self.k:
                raise DomainError(f"class {ct} is not in S_{self.k}")
            vals[ct] = Fraction(v)
        object.__setattr__(self, "values", tuple(sorted(vals.items(), key=lambda kv: kv[0].parts, reverse=True)))

    @classmethod
    def from_mapping(cls, k: int, values: Mapping) -> "VirtualCharacter":
        return cls(k, tuple(values.items()))

    def __call__(self, ct: CycleType) -> Fraction:
        return dict(self.values).get(ct, Fraction(0))

    def __add__(self, other: "VirtualCharacter") -> "VirtualCharacter":
        keys = set(dict(self.values)) | set(dict(other.values))
        return VirtualCharacter(self.k, tuple((c, self(c) + other(c)) for c in keys))

    def scale(self, a) -> "VirtualCharacter":
        return VirtualCharacter(self.k, tuple((c, v * Fraction(a)) for c, v in self.values))


def class_sizes(k: int) -> dict[CycleType, int]:
    return {ct: math.factorial(k) // centralizer_order(ct) for ct in partitions(k)}


def sk_invariant_multiplicity(chi: VirtualCharacter, max_k: int = 8) -> Fraction:
    if chi.k > max_k:
        raise EnumerationLimitError(f"k={chi.k} exceeds cap {max_k}")
    sizes = class_sizes(chi.k)
    return sum((sizes[ct] * chi(ct) for ct in sizes), Fraction(0)) / math.factorial(chi.k)


def brute_invariant_multiplicity(chi: VirtualCharacter) -> Fraction:
    total = sum((chi(cycle_type(p)) for p in itertools.permutations(range(1, chi.k + 1))), Fraction(0))
    return total / math.factorial(chi.k)
