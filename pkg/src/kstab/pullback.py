"""Pullback of psi classes along forgetful maps M_{g,m+n} -> M_{g,m}.

Two independent routes are provided:

* :func:`pullback_closed` sums delta(G(L - F_a)) over all decorations a;
* :func:`pullback_oracle` pulls back one point at a time, expanding the
  preimage of every tail divisor by inclusion-exclusion.

The oracle's output depends on the order of the one-point pullbacks; the
classes agree after :func:`kstab.strata.canonical_class`.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .delta import delta
from .errors import ArityError, DomainError, PreconditionError
from .ring import Generator, KExpr, Kind, divisor, line, normal, series_var, substitute, torsion_reduce
from .strata import (
    Caps,
    Decoration,
    F_polynomial,
    canonical_class,
    enumerate_decorations,
    forgetful_image_stable,
    normalize,
    split_by_stratum,
    to_divisor_form,
)
from .xi import XiData


@dataclass(frozen=True)
class PullbackProblem:
    g: int
    m: int
    n: int
    G: KExpr

    def __post_init__(self):
        if self.m < 1 or self.n < 0:
            raise PreconditionError("need m >= 1 and n >= 0")
        object.__setattr__(self, "G", KExpr.coerce(self.G))
        bad = [g for g in self.G.generators if g.kind in (Kind.STRATUM_TORSION, Kind.NORMAL_BUNDLE)]
        if bad:
            raise PreconditionError(f"G must not involve strata or node classes: {bad}")


def _shifted(deco: Decoration, base: Sequence[KExpr], powers: Mapping[frozenset, int] | None = None) -> dict[int, KExpr]:
    """New value base[i] - F_{i, a_i} of the i-th argument of G."""
    bindings = {}
    for i in range(1, deco.m + 1):
        leg = deco.legs[i - 1]
        tails = deco.tails(i)
        pw = [powers.get(S, 1) for S in tails] if powers else None
        bindings[i] = base[i - 1] - F_polynomial(leg, [normal(S) for S in tails], pw)
    return bindings


def _node_vars(deco: Decoration) -> list[Generator]:
    return [normal(S) for S in deco.all_tails()]


def coefficient(G: KExpr, deco: Decoration, arg_gens: Sequence[Generator], base: Sequence[KExpr],
                powers: Mapping[frozenset, int] | None = None) -> KExpr:
    shifted = _shifted(deco, base, powers)
    bound = substitute(G, {arg_gens[i - 1]: v for i, v in shifted.items()})
    return delta(bound, _node_vars(deco))


def pullback_closed(p: PullbackProblem, caps: Caps | None = None) -> KExpr:
    gens = [line(i) for i in range(1, p.m + 1)]
    base = [KExpr.gen(g) for g in gens]
    total = p.G
    for deco in enumerate_decorations(p.m, p.n, caps=caps):
        if deco.is_empty():
            continue
        c = coefficient(p.G, deco, gens, base)
        if not c.is_zero():
            total = total + deco.monomial() * c
    return total


def coeff_stratum(p: PullbackProblem, a: Decoration) -> KExpr:
    """Coefficient of O_{D_a} in pi^* G(L_1) for a single retained point."""
    if p.m != 1:
        raise PreconditionError("the per-stratum coefficient is defined for m = 1")
    if a.m != 1:
        raise ArityError("decoration must have one leg")
    if a.is_empty():
        return p.G
    return coefficient(p.G, a, [line(1)], [KExpr.gen(line(1))])


def stratum_coefficients(e: KExpr, m: int) -> dict[Decoration, KExpr]:
    return split_by_stratum(e, m)


# -- iterated oracle ------------------------------------------------------------


def pullback_step(e: KExpr, q: int, m: int, present: frozenset[int], total: int) -> KExpr:
    """Pull ``e`` back along the map forgetting label ``q``.

    ``present`` holds the forgotten labels already on the source curve.
    """
    e = to_divisor_form(e)
    upstairs_labels = sorted(present | {q})
    preimage: dict[frozenset, list[frozenset]] = {}
    psi_correction: dict[int, list[frozenset]] = {i: [] for i in range(1, m + 1)}
    for i in range(1, m + 1):
        others = [a for a in upstairs_labels if a != q]
        for mask in range(1 << len(others)):
            T = frozenset({i, q} | {others[b] for b in range(len(others)) if mask >> b & 1})
            deco = Decoration.from_tails([T], m)
            if forgetful_image_stable(deco, q, (0, total)):
                preimage.setdefault(T - {q}, [T - {q}]).append(T)
            else:
                psi_correction[i].append(T)
    bindings: dict[Generator, KExpr] = {}
    for i in range(1, m + 1):
        bindings[line(i)] = KExpr.gen(line(i)) - sum((KExpr.gen(divisor(T)) for T in psi_correction[i]), KExpr.const(0))
    for g in e.generators:
        if g.kind == Kind.STRATUM_TORSION:
            comps = preimage.get(g.tail, [g.tail])
            prod = KExpr.const(1)
            for T in comps:
                prod = prod * (1 - KExpr.gen(divisor(T)))
            bindings[g] = 1 - prod
    return normalize(substitute(e, bindings))


def pullback_oracle(p: PullbackProblem, forget_order: Sequence[int] | None = None) -> KExpr:
    """Iterated one-point pullbacks; ``forget_order[0]`` is pulled back first.

    The default order (m+1, ..., m+n) is the one the closed form reproduces
    term by term.
    """
    labels = list(range(p.m + 1, p.m + p.n + 1))
    order = list(forget_order) if forget_order is not None else labels
    if sorted(order) != labels:
        raise DomainError(f"order {order} is not a permutation of {labels}")
    e = p.G
    present: frozenset[int] = frozenset()
    for q in order:
        e = pullback_step(e, q, p.m, present, p.m + p.n)
        present = present | {q}
    return normalize(e)


def canonical(e: KExpr, p: PullbackProblem) -> KExpr:
    return canonical_class(e, p.m, p.n)


# -- exponential ------------------------------------------------------------------


def exp_series(arg: KExpr, order: int, var: Generator | None = None) -> KExpr:
    """exp(t * arg) truncated at t^order."""
    t = KExpr.gen(var or series_var("t"))
    total = KExpr.const(0, order)
    power = KExpr.const(1, order)
    for k in range(order + 1):
        total = total + power.scale(Fraction(1, math.factorial(k)))
        power = (power * t * arg).truncate(order)
    return total


def pullback_exp(g: int, m: int, n: int, weights: Sequence[Fraction | int], order: int, caps: Caps | None = None) -> KExpr:
    if len(weights) != m:
        raise ArityError("one weight per retained point")
    arg = sum((KExpr.gen(line(i)).scale(Fraction(r)) for i, r in enumerate(weights, start=1)), KExpr.const(0))
    return pullback_closed(PullbackProblem(g, m, n, exp_series(arg, order)), caps)


def exp_factorized_coefficient(weights: Sequence[Fraction | int], deco: Decoration, order: int) -> KExpr:
    """prod_i delta(exp(t r_i (L_i - F_i))), each factor over its own leg's node classes."""
    total = KExpr.const(1, order)
    for i, r in enumerate(weights, start=1):
        leg_vars = deco.normal_vars(i)
        arg = (KExpr.gen(line(i)) - F_polynomial(deco.legs[i - 1], leg_vars)).scale(Fraction(r))
        total = total * delta(exp_series(arg, order), leg_vars)
    return total


# -- ramified covers --------------------------------------------------------------


def upstairs(i: int) -> Generator:
    return line(i, "Lp")


def downstairs(i: int) -> Generator:
    return line(i, "M")


@dataclass(frozen=True)
class RamifiedPullbackProblem:
    xi: XiData
    G: KExpr
    leg_multiplicities: tuple[int, ...]
    edge_multiplicities: Mapping[frozenset, int] = field(default_factory=dict)
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "G", KExpr.coerce(self.G))
        object.__setattr__(self, "leg_multiplicities", tuple(self.leg_multiplicities))
        if len(self.leg_multiplicities) != self.xi.R:
            raise ArityError(f"need {self.xi.R} leg multiplicities, got {len(self.leg_multiplicities)}")
        if any(k < 1 for k in self.leg_multiplicities) or any(k < 1 for k in self.edge_multiplicities.values()):
            raise PreconditionError("multiplicities must be >= 1")

    @property
    def forgotten(self) -> int:
        return self.xi.A_size if self.n is None else self.n


def ramified_pullback(p: RamifiedPullbackProblem, caps: Caps | None = None) -> KExpr:
    """p^* G(M_1..M_R), written in the upstairs classes Lp_i and tail strata."""
    R = p.xi.R
    args = [downstairs(i) for i in range(1, R + 1)]
    base = [KExpr.gen(upstairs(i)) ** k for i, k in enumerate(p.leg_multiplicities, start=1)]
    total = substitute(p.G, dict(zip(args, base)))
    edges = {frozenset(S): k for S, k in p.edge_multiplicities.items()}
    for deco in enumerate_decorations(R, p.forgotten, caps=caps):
        if deco.is_empty():
            continue
        c = coefficient(p.G, deco, args, base, edges)
        if not c.is_zero():
            total = total + deco.monomial() * c
    return total


def multiple_divisor_class(tail, mult: int) -> KExpr:
    """O_{mD} = 1 - (1 - O_D)^m reduced with the self-intersection rule."""
    if mult < 1:
        raise PreconditionError("multiplicity must be >= 1")
    x = KExpr.gen(divisor(tail))
    return torsion_reduce(1 - (1 - x) ** mult)


def symmetrize_to_base(e: KExpr, fiber_map: Mapping[int, int], upstairs_prefix: str = "Lp", base_prefix: str = "L") -> KExpr:
    """Replace every upstairs class Lp_i by the base class L_{fiber_map[i]}."""
    bindings = {}
    for g in e.generators:
        if g.kind == Kind.LINE_BUNDLE and g.label.startswith(upstairs_prefix) and g.label[len(upstairs_prefix):].isdigit():
            i = int(g.label[len(upstairs_prefix):])
            if i not in fiber_map:
                raise DomainError(f"upstairs class {g} has no image in the base")
            bindings[g] = KExpr.gen(line(fiber_map[i], base_prefix))
    return substitute(e, bindings)
