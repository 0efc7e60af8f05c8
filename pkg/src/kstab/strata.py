"""Rational-tail strata, their decorations and their intersection calculus.

A decoration records, for each retained leg i = 1..m, an ordered sequence of
groups of forgotten labels.  Group 1 sits on the rational component farthest
from the main curve (together with leg i), group j on the j-th component
counted outward-in.  The stratum is the transverse intersection of the tail
divisors ``D[S_1], ..., D[S_r]`` with tail sets S_j = {i} u g_1 u ... u g_j.

Tail divisors intersect as follows: nested tail sets meet transversally,
disjoint ones (different legs) too, and overlapping non-nested ones do not
meet at all.  Self-intersection follows ``D[S]^2 = (1 - N[S]) D[S]``.
"""

from __future__ import annotations

import itertools
import os
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import (
    ArityError,
    DomainError,
    EnumerationLimitError,
    InvalidDecorationError,
)
from .ring import Generator, KExpr, Kind, Monomial, divisor, normal, pretty, substitute, torsion_reduce

LegDecoration = tuple  # tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Caps:
    max_n: int = 6
    max_codim: int = 6
    max_count: int = 500_000

    @classmethod
    def from_env(cls) -> "Caps":
        return cls(
            max_n=int(os.environ.get("KSTAB_MAX_N", cls.max_n)),
            max_codim=int(os.environ.get("KSTAB_MAX_CODIM", cls.max_codim)),
            max_count=int(os.environ.get("KSTAB_MAX_COUNT", cls.max_count)),
        )


@dataclass(frozen=True)
class Decoration:
    legs: tuple[LegDecoration, ...]

    def __post_init__(self):
        legs = tuple(tuple(tuple(int(a) for a in grp) for grp in leg) for leg in self.legs)
        object.__setattr__(self, "legs", legs)
        m = len(legs)
        if m < 1:
            raise InvalidDecorationError("a decoration needs at least one leg")
        seen: set[int] = set()
        for leg in legs:
            for grp in leg:
                if not grp:
                    raise InvalidDecorationError("groups must be nonempty")
                if any(a >= b for a, b in zip(grp, grp[1:])):
                    raise InvalidDecorationError(f"labels in group {grp} must strictly increase")
                for a in grp:
                    if a <= m:
                        raise InvalidDecorationError(f"label {a} collides with a retained leg")
                    if a in seen:
                        raise InvalidDecorationError(f"label {a} used twice")
                    seen.add(a)

    @property
    def m(self) -> int:
        return len(self.legs)

    @property
    def codim(self) -> int:
        return sum(len(leg) for leg in self.legs)

    @property
    def labels(self) -> frozenset[int]:
        return frozenset(a for leg in self.legs for grp in leg for a in grp)

    def is_empty(self) -> bool:
        return self.codim == 0

    def tails(self, i: int) -> list[frozenset[int]]:
        """Nested tail sets S_1 < S_2 < ... for leg i (1-based)."""
        acc = {i}
        out = []
        for grp in self.legs[i - 1]:
            acc |= set(grp)
            out.append(frozenset(acc))
        return out

    def all_tails(self) -> list[frozenset[int]]:
        return [S for i in range(1, self.m + 1) for S in self.tails(i)]

    def normal_vars(self, i: int) -> list[Generator]:
        return [normal(S) for S in self.tails(i)]

    def monomial(self) -> KExpr:
        return KExpr({tuple((divisor(S), 1) for S in self.all_tails()): 1})

    @classmethod
    def from_tails(cls, tails: Iterable[Iterable[int]], m: int) -> "Decoration":
        per_leg: list[list[frozenset[int]]] = [[] for _ in range(m)]
        for S in tails:
            S = frozenset(S)
            legs = [i for i in S if i <= m]
            if len(legs) != 1:
                raise InvalidDecorationError(f"tail {sorted(S)} must contain exactly one retained leg")
            per_leg[legs[0] - 1].append(S)
        legs_out = []
        for i, chain in enumerate(per_leg, start=1):
            chain.sort(key=len)
            prev = frozenset({i})
            groups = []
            for S in chain:
                if not prev < S:
                    raise InvalidDecorationError("tail sets of one leg must be strictly nested")
                groups.append(tuple(sorted(S - prev)))
                prev = S
            legs_out.append(tuple(groups))
        return cls(tuple(legs_out))

    @classmethod
    def parse(cls, text: str, m: int | None = None) -> "Decoration":
        """Parse ``"(4)(8)(5,7,14) | (6)(10,12,13)(11) | (9)"``; ``-`` is an empty leg."""
        legs = []
        for part in text.split("|"):
            part = part.strip()
            if part in ("", "-", "()"):
                legs.append(())
                continue
            if not re.fullmatch(r"(\(\s*\d+(\s*,\s*\d+)*\s*\)\s*)+", part):
                raise InvalidDecorationError(f"malformed leg decoration {part!r}")
            groups = re.findall(r"\(([^)]*)\)", part)
            legs.append(tuple(tuple(int(a) for a in g.split(",")) for g in groups))
        if m is not None:
            if len(legs) > m:
                raise InvalidDecorationError(f"{len(legs)} legs given for m={m}")
            legs += [()] * (m - len(legs))
        return cls(tuple(legs))

    def __str__(self) -> str:
        def leg_text(leg):
            return "".join("(" + ",".join(map(str, g)) + ")" for g in leg) or "-"

        return " | ".join(leg_text(leg) for leg in self.legs)

    def short_name(self) -> str:
        """Name in the D_{12}, D_{(12)(3)} style (single-digit labels read best)."""
        pieces = []
        for i, leg in enumerate(self.legs, start=1):
            if not leg:
                continue
            groups = ["".join(map(str, g)) for g in leg]
            groups[0] = f"{i}{groups[0]}"
            pieces.append(groups[0] if len(groups) == 1 else "".join(f"({g})" for g in groups))
        return "D_{" + ",".join(pieces) + "}" if pieces else "1"


@dataclass(frozen=True)
class StratumClass:
    decoration: Decoration

    @property
    def codim(self) -> int:
        return self.decoration.codim

    @property
    def normal_bundle_vars(self) -> list[list[Generator]]:
        return [self.decoration.normal_vars(i) for i in range(1, self.decoration.m + 1)]

    def expr(self) -> KExpr:
        return self.decoration.monomial()


# -- enumeration ----------------------------------------------------------------


def _leg_decorations(available: Sequence[int], budget: int) -> Iterator[LegDecoration]:
    yield ()
    if budget <= 0:
        return
    for r in range(1, len(available) + 1):
        for grp in itertools.combinations(available, r):
            rest = [a for a in available if a not in grp]
            for tail in _leg_decorations(rest, budget - 1):
                yield (grp,) + tail


def enumerate_decorations(m: int, n: int, max_codim: int | None = None, caps: Caps | None = None) -> list[Decoration]:
    if m < 1 or n < 0:
        raise DomainError("need m >= 1 and n >= 0")
    caps = caps or Caps.from_env()
    if n > caps.max_n:
        raise EnumerationLimitError(f"n={n} exceeds cap {caps.max_n}")
    budget = n if max_codim is None else max_codim
    if budget > caps.max_codim:
        budget = caps.max_codim
        if max_codim is not None:
            raise EnumerationLimitError(f"max_codim={max_codim} exceeds cap {caps.max_codim}")
    labels = list(range(m + 1, m + n + 1))
    out: list[Decoration] = []

    def rec(leg: int, available: list[int], budget: int, acc: list[LegDecoration]):
        if leg > m:
            out.append(Decoration(tuple(acc)))
            if len(out) > caps.max_count:
                raise EnumerationLimitError(f"more than {caps.max_count} decorations")
            return
        for d in _leg_decorations(available, budget):
            used = {a for g in d for a in g}
            rec(leg + 1, [a for a in available if a not in used], budget - len(d), acc + [d])

    rec(1, labels, budget, [])
    out.sort(key=lambda d: (d.codim, d.legs))
    return out


# -- types and F-polynomials ------------------------------------------------------


def decoration_type(leg: LegDecoration) -> int | tuple[int, ...]:
    """0 for type 0, else the block starts (l_1, ..., l_s).

    Blocks start at every group whose smallest label is below the smallest
    labels of all earlier groups (successive prefix minima).
    """
    leg = tuple(tuple(g) for g in leg)
    if not leg:
        raise InvalidDecorationError("type is defined for nonempty decorations")
    for grp in leg:
        if not grp or any(a >= b for a, b in zip(grp, grp[1:])):
            raise InvalidDecorationError(f"malformed group {grp}")
    flat = [a for g in leg for a in g]
    if len(set(flat)) != len(flat):
        raise InvalidDecorationError("labels must be distinct")
    starts = []
    current = leg[0][0]
    for pos, grp in enumerate(leg[1:], start=2):
        if grp[0] < current:
            starts.append(pos)
            current = grp[0]
    return 0 if not starts else tuple(starts)


def F_polynomial(leg: LegDecoration, vars: Sequence[Generator], powers: Sequence[int] | None = None) -> KExpr:
    r = len(leg)
    if len(vars) != r:
        raise ArityError(f"decoration of degree {r} needs {r} variables, got {len(vars)}")
    if powers is None:
        powers = [1] * r
    if len(powers) != r or any(p < 1 for p in powers):
        raise ArityError("powers must be positive and match the degree")
    if r == 0:
        return KExpr.const(0)
    t = decoration_type(leg)
    bounds = [1] + ([] if t == 0 else list(t)) + [r + 1]
    total = KExpr.const(0)
    for lo, hi in zip(bounds, bounds[1:]):
        mono = tuple((vars[i - 1], powers[i - 1]) for i in range(lo, hi))
        total = total + (1 - KExpr({mono: 1}))
    return total


# -- intersection calculus -----------------------------------------------------------


def tails_compatible(S: frozenset[int], T: frozenset[int]) -> bool:
    return S <= T or T <= S or not (S & T)


def _torsion_support(mono: Monomial) -> list[frozenset[int]]:
    return [g.tail for g, _ in mono if g.kind == Kind.STRATUM_TORSION]


def normalize(e: KExpr) -> KExpr:
    """Kill products of non-meeting divisors, then apply the self-intersection rule."""
    kept = {}
    for mono, c in e.items():
        tails = _torsion_support(mono)
        if all(tails_compatible(a, b) for a, b in itertools.combinations(tails, 2)):
            kept[mono] = c
    return torsion_reduce(KExpr(kept, e.truncation))


def strata_product(S: StratumClass, T: StratumClass) -> KExpr:
    if S.decoration.m != T.decoration.m:
        raise DomainError("strata live on different moduli spaces")
    return normalize(S.expr() * T.expr())


def stratum_of(mono: Monomial, m: int) -> Decoration:
    return Decoration.from_tails(_torsion_support(mono), m)


def split_by_stratum(e: KExpr, m: int) -> dict[Decoration, KExpr]:
    """Group the terms of a normalized expression by their stratum."""
    out: dict[Decoration, dict] = {}
    for mono, c in e.items():
        deco = stratum_of(mono, m)
        rest = tuple((g, k) for g, k in mono if g.kind != Kind.STRATUM_TORSION)
        out.setdefault(deco, {})[rest] = c
    return {d: KExpr(t, e.truncation) for d, t in sorted(out.items(), key=lambda kv: (kv[0].codim, kv[0].legs))}


def forgetful_image_stable(S: StratumClass | Decoration, forgotten_label: int, ambient: tuple[int, int]) -> bool:
    """Whether forgetting ``forgotten_label`` leaves every tail component stable."""
    deco = S.decoration if isinstance(S, StratumClass) else S
    _, total = ambient
    if not (deco.m < forgotten_label <= total):
        raise DomainError(f"label {forgotten_label} is not a forgotten point of 1..{total}")
    for leg in deco.legs:
        for grp in leg:
            if forgotten_label in grp:
                # leg + node on the outermost component, two nodes on the others
                return len(grp) + 2 - 1 >= 3
    return True


def render(e: KExpr, m: int) -> str:
    """Human rendering with compact strata names and L_{ij} node variables."""
    if e.is_zero():
        return "0"
    out = ""
    for deco, coeff in split_by_stratum(e, m).items():
        names = {}
        for i in range(1, m + 1):
            for j, S in enumerate(deco.tails(i), start=1):
                names[normal(S)] = f"L_{{{i}{j}}}"
        if deco.is_empty():
            chunk = pretty(coeff, names)
        elif not coeff.generators and abs(coeff.constant_term()) == 1:
            chunk = ("-" if coeff.constant_term() < 0 else "") + f"O_{deco.short_name()}"
        else:
            chunk = f"O_{deco.short_name()}*({pretty(coeff, names)})"
        if not out:
            out = chunk
        elif chunk.startswith("-"):
            out += f" - {chunk[1:]}"
        else:
            out += f" + {chunk}"
    return out


# -- stratum relations and canonical classes --------------------------------------------


def leg_tails(m: int, n: int) -> list[frozenset[int]]:
    labels = range(m + 1, m + n + 1)
    return [
        frozenset((i,) + c)
        for i in range(1, m + 1)
        for r in range(1, n + 1)
        for c in itertools.combinations(labels, r)
    ]


def to_divisor_form(e: KExpr) -> KExpr:
    """Rewrite N[S] as 1 - D[S]; on D[S] these agree since N[S] restricts O(-D[S])."""
    bindings = {g: 1 - KExpr.gen(divisor(g.tail)) for g in e.generators if g.kind == Kind.NORMAL_BUNDLE}
    return substitute(e, bindings) if bindings else e


class StratumRelations:
    """Relations among tail-strata classes on M_{g, m+n}.

    Besides the crossing rule, each tail divisor D[T] carries a genus-zero
    factor M_{0, T + node}.  On it the boundary divisors separating {i, j} from
    {k, node} and those separating {i, k} from {j, node} are fibres of the
    cross-ratio map to P^1, so ``D[T] * (prod (1 - D[S]) - prod (1 - D[S']))``
    vanishes.  Canonical classes are normal forms modulo the ideal these
    generate, computed with a Groebner basis.
    """

    def __init__(self, m: int, n: int):
        import sympy

        self.m, self.n = m, n
        self.tails = leg_tails(m, n)
        self.index = {S: k for k, S in enumerate(self.tails)}
        self.symbols = sympy.symbols(f"x0:{len(self.tails)}") if self.tails else ()
        x = dict(zip(self.tails, self.symbols))
        gens = []
        for a, b in itertools.combinations(self.tails, 2):
            if not tails_compatible(a, b):
                gens.append(x[a] * x[b])
        for T in self.tails:
            i = min(T)
            if len(T) < 3:
                continue
            for j, k in itertools.combinations(sorted(T - {i}), 2):
                left = sympy.Mul(*[1 - x[S] for S in self.tails if S < T and j in S and k not in S])
                right = sympy.Mul(*[1 - x[S] for S in self.tails if S < T and k in S and j not in S])
                gens.append(sympy.expand(x[T] * (left - right)))
        self.basis: list[tuple[tuple[int, ...], Fraction, dict[tuple[int, ...], Fraction]]] = []
        if gens:
            gb = sympy.groebner(gens, *self.symbols, order="grevlex")
            for poly in gb.polys:
                terms = {tuple(mon): Fraction(int(c.numerator), int(c.denominator)) for mon, c in poly.terms()}
                lead = max(terms, key=_grevlex_key)
                self.basis.append((lead, terms[lead], terms))
        self._nf_cache: dict[tuple[int, ...], dict[tuple[int, ...], Fraction]] = {}

    def _nf(self, alpha: tuple[int, ...]) -> dict[tuple[int, ...], Fraction]:
        cached = self._nf_cache.get(alpha)
        if cached is not None:
            return cached
        result: dict[tuple[int, ...], Fraction] = {alpha: Fraction(1)}
        for lead, lc, terms in self.basis:
            if all(a >= b for a, b in zip(alpha, lead)):
                shift = tuple(a - b for a, b in zip(alpha, lead))
                result = {}
                for mon, c in terms.items():
                    if mon == lead:
                        continue
                    moved = tuple(s + u for s, u in zip(shift, mon))
                    for m2, c2 in self._nf(moved).items():
                        result[m2] = result.get(m2, 0) - c / lc * c2
                result = {k: v for k, v in result.items() if v}
                break
        self._nf_cache[alpha] = result
        return result

    def canonical_class(self, e: KExpr) -> KExpr:
        b = to_divisor_form(e)
        acc: dict[Monomial, Fraction] = {}
        width = len(self.tails)
        for mono, c in b.items():
            alpha = [0] * width
            rest = []
            for g, k in mono:
                if g.kind == Kind.STRATUM_TORSION:
                    if g.tail not in self.index:
                        raise DomainError(f"{g} is not a tail divisor for m={self.m}, n={self.n}")
                    alpha[self.index[g.tail]] = k
                else:
                    rest.append((g, k))
            for beta, c2 in self._nf(tuple(alpha)).items():
                mono2 = tuple(rest) + tuple((divisor(self.tails[t]), k) for t, k in enumerate(beta) if k)
                acc[mono2] = acc.get(mono2, 0) + c * c2
        return torsion_reduce(KExpr(acc, e.truncation))


def _grevlex_key(mon: tuple[int, ...]) -> tuple:
    return (sum(mon), tuple(-a for a in reversed(mon)))


@lru_cache(maxsize=None)
def stratum_relations(m: int, n: int) -> StratumRelations:
    return StratumRelations(m, n)


def canonical_class(e: KExpr, m: int, n: int) -> KExpr:
    """Canonical representative of ``e`` modulo all implemented stratum relations."""
    return stratum_relations(m, n).canonical_class(e)
