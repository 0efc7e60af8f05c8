"""The multivariate difference operator.

For active variables x_1..x_n,

    delta(F) = sum_{S subset [n]} (-1)^|S| F|_{x_S = 1}  /  prod (1 - x_i)

with every other generator held constant.  The quotient is computed by exact
division, one linear factor at a time, and a nonzero remainder is treated as
an internal error.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from .errors import InternalInvariantError, PreconditionError
from .ring import Generator, KExpr, Monomial, substitute


@dataclass(frozen=True)
class DeltaRequest:
    expr: KExpr
    active_vars: tuple[Generator, ...]

    def __post_init__(self):
        if len(set(self.active_vars)) != len(self.active_vars):
            raise PreconditionError("active variables must be distinct")


def _split(e: KExpr, x: Generator) -> dict[int, dict[Monomial, Fraction]]:
    """Coefficients of e as a Laurent polynomial in x."""
    by_power: dict[int, dict[Monomial, Fraction]] = {}
    for mono, c in e.items():
        k = 0
        rest = []
        for g, p in mono:
            if g == x:
                k = p
            else:
                rest.append((g, p))
        by_power.setdefault(k, {})[tuple(rest)] = c
    return by_power


def divide_one_minus(e: KExpr, x: Generator) -> KExpr:
    """Exact quotient e / (1 - x); raises if the remainder is nonzero."""
    parts = _split(e, x)
    if not parts:
        return KExpr({}, e.truncation)
    lo, hi = min(parts), max(parts)
    # Q_k = c_lo + ... + c_k for k = lo..hi-1, remainder = c_lo + ... + c_hi
    running: dict[Monomial, Fraction] = {}
    out: dict[Monomial, Fraction] = {}
    for k in range(lo, hi + 1):
        for mono, c in parts.get(k, {}).items():
            running[mono] = running.get(mono, 0) + c
        if k == hi:
            break
        for mono, c in running.items():
            if c:
                key = mono + ((x, k),) if k else mono
                out[key] = out.get(key, 0) + c
    if any(running.values()):
        raise InternalInvariantError(f"{e} is not divisible by (1 - {x})")
    return KExpr(out, e.truncation)


def delta(expr: KExpr | DeltaRequest, active_vars: Sequence[Generator] | None = None) -> KExpr:
    if isinstance(expr, DeltaRequest):
        req = expr
    else:
        req = DeltaRequest(KExpr.coerce(expr), tuple(active_vars or ()))
    numerator = req.expr
    for x in req.active_vars:
        numerator = numerator - substitute(numerator, {x: 1})
    quotient = numerator
    for x in req.active_vars:
        quotient = divide_one_minus(quotient, x)
    return quotient


def delta_factor_law(factors: Sequence[tuple[KExpr, Sequence[Generator]]]) -> bool:
    """Check delta(prod F_i) == prod delta(F_i) for disjoint active variable sets."""
    seen: set[Generator] = set()
    for _, vs in factors:
        if seen & set(vs):
            raise PreconditionError("factors must have pairwise disjoint active variables")
        seen |= set(vs)
    product = KExpr.const(1)
    all_vars: list[Generator] = []
    rhs = KExpr.const(1)
    for f, vs in factors:
        product = product * f
        all_vars.extend(vs)
        rhs = rhs * delta(f, vs)
    return delta(product, all_vars) == rhs
