"""Exact formal ring of K-theory expressions.

A :class:`KExpr` is a finite sum of monomials in named generators with
:class:`fractions.Fraction` coefficients.  Generators come in four kinds:

* line bundles (``L1``, ``Lp2``, ``x1``): units, negative exponents allowed;
* normal-bundle classes ``N[1,2]`` of the tail divisor with tail set {1,2};
* stratum torsion classes ``D[1,2]``, the structure sheaf of that divisor;
* series variables (``q``, ``t``) used for truncated power series.

Values are immutable.  The ring itself is free; the torsion relation
``D[S]^2 = (1 - N[S]) D[S]`` is applied only by :func:`torsion_reduce`.

Text form (see :func:`serialize`)::

    -1*D[1,2]^1 + 1*L1^1 + 1/2*L1^2*q^1 + O(3)

``O(k)`` marks a truncated series: terms of total series degree >= k are
discarded.
"""

from __future__ import annotations

import json
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from functools import cached_property
from typing import Union

from .errors import (
    ArithmeticLimitError,
    NonInvertibleSubstitutionError,
    ParseError,
    UnresolvedRelationError,
)

MAX_EXPONENT = 10_000
SERIES_LABELS = frozenset({"q", "t"})


class Kind(IntEnum):
    LINE_BUNDLE = 0
    NORMAL_BUNDLE = 1
    STRATUM_TORSION = 2
    SERIES_VAR = 3


def _natural_key(label: str) -> tuple:
    # "N[1,2]" must sort before "N[1,2,3]": drop the closing bracket so tails compare as prefixes
    parts = re.split(r"(\d+)", label.rstrip("]"))
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p)


@dataclass(frozen=True)
class Generator:
    kind: Kind
    label: str
    sort_key: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "sort_key", (int(self.kind), _natural_key(self.label)))

    def __lt__(self, other: "Generator") -> bool:
        return self.sort_key < other.sort_key

    def __str__(self) -> str:
        return self.label

    @property
    def tail(self) -> frozenset[int]:
        """Tail set of a ``D[...]`` or ``N[...]`` generator."""
        if self.kind not in (Kind.STRATUM_TORSION, Kind.NORMAL_BUNDLE):
            raise ValueError(f"{self.label} is not a stratum generator")
        inner = self.label[self.label.index("[") + 1 : -1]
        return frozenset(int(s) for s in inner.split(","))


def line(i: int | str, prefix: str = "L") -> Generator:
    return Generator(Kind.LINE_BUNDLE, f"{prefix}{i}")


def series_var(label: str = "q") -> Generator:
    return Generator(Kind.SERIES_VAR, label)


def _tail_label(tail: Iterable[int]) -> str:
    return ",".join(str(i) for i in sorted(tail))


def divisor(tail: Iterable[int]) -> Generator:
    return Generator(Kind.STRATUM_TORSION, f"D[{_tail_label(tail)}]")


def normal(tail: Iterable[int]) -> Generator:
    return Generator(Kind.NORMAL_BUNDLE, f"N[{_tail_label(tail)}]")


def generator_from_label(label: str) -> Generator:
    if "[" in label:
        head = label[: label.index("[")]
        if head == "D":
            return Generator(Kind.STRATUM_TORSION, label)
        if head == "N":
            return Generator(Kind.NORMAL_BUNDLE, label)
        raise ValueError(f"unknown bracketed generator {label!r}")
    if label in SERIES_LABELS:
        return Generator(Kind.SERIES_VAR, label)
    return Generator(Kind.LINE_BUNDLE, label)


Monomial = tuple  # tuple[tuple[Generator, int], ...], sorted by generator
Scalar = Union[int, Fraction]


def _mono_key(mono: Monomial) -> tuple:
    return tuple((g.sort_key, e) for g, e in mono)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for g, e in b:
        out[g] = out.get(g, 0) + e
    return tuple(sorted(((g, e) for g, e in out.items() if e != 0), key=lambda p: p[0].sort_key))


def _series_degree(mono: Monomial) -> int:
    return sum(e for g, e in mono if g.kind == Kind.SERIES_VAR)


def _min_trunc(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class KExpr:
    """Immutable element of the formal ring, always in canonical form."""

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None, truncation: int | None = None):
        if truncation is not None and truncation < 0:
            raise ValueError("truncation order must be nonnegative")
        clean: dict[Monomial, Fraction] = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c == 0:
                continue
            merged: dict[Generator, int] = {}
            for g, e in mono:
                merged[g] = merged.get(g, 0) + e
            mono = tuple(sorted(((g, e) for g, e in merged.items() if e != 0), key=lambda p: p[0].sort_key))
            for g, e in mono:
                if abs(e) > MAX_EXPONENT:
                    raise ArithmeticLimitError(f"exponent {e} of {g} exceeds bound {MAX_EXPONENT}")
                if e < 0 and g.kind != Kind.LINE_BUNDLE:
                    raise ValueError(f"negative exponent on non-unit generator {g}")
            if truncation is not None and _series_degree(mono) > truncation:
                continue
            clean[mono] = clean.get(mono, Fraction(0)) + c
            if clean[mono] == 0:
                del clean[mono]
        self._terms = dict(sorted(clean.items(), key=lambda kv: _mono_key(kv[0])))
        self.truncation = truncation

    # -- constructors -----------------------------------------------------
    @classmethod
    def const(cls, c: Scalar, truncation: int | None = None) -> "KExpr":
        return cls({(): c}, truncation)

    @classmethod
    def gen(cls, g: Generator, exp: int = 1) -> "KExpr":
        return cls({((g, exp),): 1})

    @classmethod
    def coerce(cls, x) -> "KExpr":
        if isinstance(x, KExpr):
            return x
        if isinstance(x, Generator):
            return cls.gen(x)
        if isinstance(x, (int, Fraction)):
            return cls.const(x)
        if isinstance(x, str):
            return parse(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to KExpr")

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @cached_property
    def generators(self) -> tuple[Generator, ...]:
        gens = {g for mono in self._terms for g, _ in mono}
        return tuple(sorted(gens, key=lambda g: g.sort_key))

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._terms.get(mono, Fraction(0))

    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def degree_in(self, g: Generator) -> int:
        return max((e for mono in self._terms for h, e in mono if h == g), default=0)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other) -> "KExpr":
        other = KExpr.coerce(other)
        out = dict(self._terms)
        for mono, c in other._terms.items():
            out[mono] = out.get(mono, 0) + c
        return KExpr(out, _min_trunc(self.truncation, other.truncation))

    __radd__ = __add__

    def __neg__(self) -> "KExpr":
        return KExpr({m: -c for m, c in self._terms.items()}, self.truncation)

    def __sub__(self, other) -> "KExpr":
        return self + (-KExpr.coerce(other))

    def __rsub__(self, other) -> "KExpr":
        return KExpr.coerce(other) - self

    def __mul__(self, other) -> "KExpr":
        other = KExpr.coerce(other)
        trunc = _min_trunc(self.truncation, other.truncation)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = _mono_mul(m1, m2)
                if trunc is not None and _series_degree(mono) > trunc:
                    continue
                out[mono] = out.get(mono, 0) + c1 * c2
        return KExpr(out, trunc)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "KExpr":
        if not isinstance(k, int) or k < 0:
            if isinstance(k, int) and len(self._terms) == 1:
                return unit_inverse(self) ** (-k)
            raise ValueError("only nonnegative integer powers of non-units")
        result = KExpr.const(1, self.truncation)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c: Scalar) -> "KExpr":
        return KExpr({m: c * v for m, v in self._terms.items()}, self.truncation)

    def truncate(self, order: int | None) -> "KExpr":
        return KExpr(self._terms, _min_trunc(self.truncation, order))

    def __eq__(self, other) -> bool:
        try:
            other = KExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms and self.truncation == other.truncation

    def __hash__(self) -> int:
        return hash((tuple(self._terms.items()), self.truncation))

    def __str__(self) -> str:
        return serialize(self)

    def __repr__(self) -> str:
        return f"KExpr({serialize(self)!r})"


def unit_inverse(e: KExpr) -> KExpr:
    """Inverse of a unit: a single term whose generators are all line bundles."""
    if len(e) != 1:
        raise NonInvertibleSubstitutionError(f"{e} is not a unit")
    (mono, c), = e.items()
    if any(g.kind != Kind.LINE_BUNDLE for g, _ in mono):
        raise NonInvertibleSubstitutionError(f"{e} is not a unit")
    return KExpr({tuple((g, -x) for g, x in mono): 1 / c}, e.truncation)


def substitute(e: KExpr, bindings: Mapping[Generator, object]) -> KExpr:
    """Simultaneous substitution of generators by expressions (one pass)."""
    bound = {g: KExpr.coerce(v) for g, v in bindings.items()}
    powers: dict[tuple[Generator, int], KExpr] = {}

    def power(g: Generator, k: int) -> KExpr:
        key = (g, k)
        if key not in powers:
            v = bound[g]
            powers[key] = v**k if k >= 0 else unit_inverse(v) ** (-k)
        return powers[key]

    trunc = e.truncation
    for v in bound.values():
        trunc = _min_trunc(trunc, v.truncation)
    acc: dict[Monomial, Fraction] = {}
    for mono, c in e.items():
        rest = tuple((g, k) for g, k in mono if g not in bound)
        term = KExpr({rest: c}, trunc)
        for g, k in mono:
            if g in bound:
                term = term * power(g, k)
        for m2, c2 in term.items():
            acc[m2] = acc.get(m2, 0) + c2
    return KExpr(acc, trunc)


def default_relations(e: KExpr) -> dict[Generator, KExpr]:
    """x^2 = (1 - N[S]) x for every divisor generator x = D[S] occurring in ``e``."""
    return {
        g: 1 - KExpr.gen(normal(g.tail))
        for g in e.generators
        if g.kind == Kind.STRATUM_TORSION
    }


def torsion_reduce(e: KExpr, relations: Mapping[Generator, KExpr] | None = None) -> KExpr:
    """Rewrite x^k -> rel(x)^(k-1) x until no torsion exponent is >= 2."""
    if relations is None:
        relations = default_relations(e)
    current = e
    for _ in range(MAX_EXPONENT):
        acc: dict[Monomial, Fraction] = {}
        changed = False
        for mono, c in current.items():
            high = [(g, k) for g, k in mono if g.kind == Kind.STRATUM_TORSION and k >= 2]
            if not high:
                acc[mono] = acc.get(mono, 0) + c
                continue
            changed = True
            term = KExpr({tuple((g, 1 if (g, k) in high else k) for g, k in mono): c}, current.truncation)
            for g, k in high:
                if g not in relations:
                    raise UnresolvedRelationError(f"no relation for squared torsion generator {g}")
                term = term * KExpr.coerce(relations[g]) ** (k - 1)
            for m2, c2 in term.items():
                acc[m2] = acc.get(m2, 0) + c2
        current = KExpr(acc, current.truncation)
        if not changed:
            return current
    raise ArithmeticLimitError("torsion reduction did not terminate")


# -- text format --------------------------------------------------------------


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def serialize(e: KExpr) -> str:
    parts = []
    for mono, c in e.items():
        if not mono:
            parts.append(_fmt_coeff(c))
        else:
            parts.append("*".join([_fmt_coeff(c)] + [f"{g.label}^{k}" for g, k in mono]))
    text = " + ".join(parts) if parts else "0"
    if e.truncation is not None:
        text += f" + O({e.truncation + 1})"
    return text


def pretty(e: KExpr, names: Mapping[Generator, str] | None = None) -> str:
    """Compact human form: ``L1^2 - 2*L1 + 1/2``. Parses back with :func:`parse` when names is None."""
    names = names or {}
    out = ""
    for mono, c in e.items():
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        factors = [names.get(g, g.label) + (f"^{k}" if k != 1 else "") for g, k in mono]
        if mag != 1 or not factors:
            factors.insert(0, _fmt_coeff(mag))
        body = "*".join(factors)
        out += (f"-{body}" if sign == "-" else body) if not out else f" {sign} {body}"
    out = out or "0"
    if e.truncation is not None:
        out += f" + O({e.truncation + 1})"
    return out


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z][A-Za-z0-9_']*(?:\[\s*\d+(?:\s*,\s*\d+)*\s*\])?)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            value = m.group(kind).replace(" ", "")
            self.tokens.append((kind, "^" if value == "**" else value, m.start(kind)))
            pos = m.end()
        self.i = 0
        self.truncation: int | None = None

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", "", len(self.text))

    def take(self, value: str | None = None):
        tok = self.peek()
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        if tok[0] == "end":
            raise ParseError("unexpected end of input", tok[2])
        self.i += 1
        return tok

    def parse(self) -> KExpr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2])
        return e.truncate(self.truncation) if self.truncation is not None else e

    def expr(self) -> KExpr:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            if op == "+" and self.peek()[1] == "O" and self._is_big_o():
                self.take()
                self.take("(")
                kind, val, pos = self.take()
                if kind != "num":
                    raise ParseError("expected integer order inside O(...)", pos)
                self.take(")")
                order = int(val) - 1
                if order < 0:
                    raise ParseError("O(k) needs k >= 1", pos)
                self.truncation = order if self.truncation is None else min(order, self.truncation)
                continue
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def _is_big_o(self) -> bool:
        nxt = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None
        return nxt is not None and nxt[1] == "("

    def term(self) -> KExpr:
        e = self.unary()
        while True:
            tok = self.peek()
            if tok[1] == "*":
                self.take()
                e = e * self.unary()
            elif tok[1] == "/":
                self.take()
                kind, val, pos = self.take()
                if kind != "num":
                    raise ParseError("division only by integer literals", pos)
                if int(val) == 0:
                    raise ParseError("division by zero", pos)
                e = e.scale(Fraction(1, int(val)))
            elif tok[0] in ("num", "id") or tok[1] == "(":
                e = e * self.unary()
            else:
                return e

    def unary(self) -> KExpr:
        tok = self.peek()
        if tok[1] == "-":
            self.take()
            return -self.unary()
        if tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> KExpr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            kind, val, pos = self.take()
            if kind != "num":
                raise ParseError("exponent must be an integer", pos)
            k = sign * int(val)
            if abs(k) > MAX_EXPONENT:
                raise ArithmeticLimitError(f"exponent {k} exceeds bound {MAX_EXPONENT}")
            if k < 0:
                try:
                    return unit_inverse(base) ** (-k)
                except NonInvertibleSubstitutionError as exc:
                    raise ParseError(str(exc), pos) from None
            return base**k
        return base

    def atom(self) -> KExpr:
        kind, val, pos = self.take()
        if kind == "num":
            return KExpr.const(int(val))
        if kind == "id":
            try:
                return KExpr.gen(generator_from_label(val))
            except ValueError as exc:
                raise ParseError(str(exc), pos) from None
        if val == "(":
            e = self.expr()
            self.take(")")
            return e
        raise ParseError(f"unexpected token {val!r}", pos)


def parse(text: str) -> KExpr:
    """Parse the serialized grammar or ordinary infix (``(1-x)^3*L1 - 1/2``)."""
    return _Parser(text).parse()


deserialize = parse


def to_json(e: KExpr) -> dict:
    return {
        "generators": [{"kind": g.kind.name, "label": g.label} for g in e.generators],
        "terms": [
            {"coeff": _fmt_coeff(c), "monomial": [[g.label, k] for g, k in mono]}
            for mono, c in e.items()
        ],
        "truncation": e.truncation,
    }


def from_json(data: dict | str) -> KExpr:
    if isinstance(data, str):
        data = json.loads(data)
    kinds = {d["label"]: Generator(Kind[d["kind"]], d["label"]) for d in data.get("generators", [])}
    terms: dict[Monomial, Fraction] = {}
    for t in data["terms"]:
        mono = tuple((kinds.get(lab) or generator_from_label(lab), int(k)) for lab, k in t["monomial"])
        mono = tuple(sorted(mono, key=lambda p: p[0].sort_key))
        terms[mono] = terms.get(mono, 0) + Fraction(t["coeff"])
    return KExpr(terms, data.get("truncation"))
