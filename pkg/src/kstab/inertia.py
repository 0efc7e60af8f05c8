"""Cycle types of S_d and the inertia bookkeeping of Sym^d X."""

from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import reduce

from .errors import DomainError, ParseError, PreconditionError


@dataclass(frozen=True)
class CycleType:
    """Partition of d stored as sorted pairs (length, count)."""

    d: int
    counts: tuple[tuple[int, int], ...]

    def __post_init__(self):
        counts = tuple(sorted((int(i), int(c)) for i, c in dict(self.counts).items() if c))
        object.__setattr__(self, "counts", counts)
        if any(i < 1 or c < 0 for i, c in counts) or sum(i * c for i, c in counts) != self.d:
            raise DomainError(f"{counts} is not a cycle type of degree {self.d}")

    @classmethod
    def from_parts(cls, parts) -> "CycleType":
        parts = list(parts)
        return cls(sum(parts), tuple(Counter(parts).items()))

    @property
    def parts(self) -> tuple[int, ...]:
        return tuple(i for i, c in sorted(self.counts, reverse=True) for _ in range(c))

    @property
    def N(self) -> int:
        return sum(c for _, c in self.counts)

    @property
    def t(self) -> int:
        return len(self.counts)

    def count(self, i: int) -> int:
        return dict(self.counts).get(i, 0)

    def __str__(self) -> str:
        return "+".join(map(str, self.parts))


def partitions(d: int) -> list[CycleType]:
    """All partitions of d, reverse lexicographic (d first, 1+...+1 last)."""
    if d < 1:
        raise DomainError("d must be positive")

    def rec(rest: int, cap: int):
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, cap), 0, -1):
            for tail in rec(rest - first, first):
                yield (first,) + tail

    return [CycleType.from_parts(p) for p in rec(d, d)]


def centralizer_order(ct: CycleType) -> int:
    return math.prod(math.factorial(c) * i**c for i, c in ct.counts)


# -- permutations -----------------------------------------------------------------


def parse_permutation(text: str, d: int | None = None) -> tuple[int, ...]:
    """Cycle notation ``(1 2)(3 4)``, ``(1,2)(3,4)`` or ``(12)(34)(5)`` to one-line form.

    Without separators, every digit is its own label.  ``d`` defaults to the
    largest label present.
    """
    text = text.strip()
    if not text or text in ("()", "id", "e"):
        cycles = []
    elif re.fullmatch(r"(\(\s*\d+(?:[\s,]+\d+)*\s*\)\s*)+", text):
        cycles = []
        for body in re.findall(r"\(([^)]*)\)", text):
            items = re.split(r"[\s,]+", body.strip())
            if len(items) == 1 and len(items[0]) > 1:
                items = list(items[0])
            cycles.append([int(a) for a in items])
    else:
        raise ParseError(f"malformed permutation {text!r}", 0)
    labels = [a for c in cycles for a in c]
    if len(labels) != len(set(labels)) or any(a < 1 for a in labels):
        raise ParseError(f"cycles of {text!r} must use distinct positive labels", 0)
    size = max(labels, default=0) if d is None else d
    if labels and max(labels) > size:
        raise DomainError(f"label {max(labels)} exceeds d={size}")
    image = list(range(1, size + 1))
    for c in cycles:
        for a, b in zip(c, c[1:] + c[:1]):
            image[a - 1] = b
    return tuple(image)


def cycles(sigma: tuple[int, ...]) -> list[tuple[int, ...]]:
    seen = set()
    out = []
    for start in range(1, len(sigma) + 1):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        nxt = sigma[start - 1]
        while nxt != start:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = sigma[nxt - 1]
        out.append(tuple(cyc))
    return out


def cycle_type(sigma: tuple[int, ...]) -> CycleType:
    return CycleType.from_parts(len(c) for c in cycles(sigma)) if sigma else CycleType(0, ())


def format_permutation(sigma: tuple[int, ...]) -> str:
    return "".join("(" + " ".join(map(str, c)) + ")" for c in cycles(sigma)) or "()"


def compose(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    """a after b."""
    return tuple(a[b[i] - 1] for i in range(len(a)))


def brute_centralizer_order(sigma: tuple[int, ...]) -> int:
    return sum(1 for tau in itertools.permutations(range(1, len(sigma) + 1)) if compose(tau, sigma) == compose(sigma, tau))


def representative(ct: CycleType) -> tuple[int, ...]:
    image = []
    start = 1
    for length in ct.parts:
        image += list(range(start + 1, start + length)) + [start]
        start += length
    return tuple(image)


# -- inertia components --------------------------------------------------------------


@dataclass(frozen=True)
class InertiaComponent:
    cycle_type: CycleType
    fixed_locus_rank: int
    group_descriptor: tuple[tuple[int, int], ...]
    centralizer_order: int
    coarse_target_rank: int
    coarse_factors: tuple[tuple[int, int], ...]

    def group_text(self) -> str:
        pieces = []
        for i, c in self.group_descriptor:
            pieces.append(f"S{c}" if i == 1 else f"(S{c} x| (Z/{i})^{c})")
        return " x ".join(pieces)

    def locus_text(self) -> str:
        return f"X^{self.fixed_locus_rank}/({self.group_text()})"

    def coarse_text(self) -> str:
        return " x ".join(f"Sym^{c} X" for _, c in self.coarse_factors)

    def as_dict(self) -> dict:
        return {
            "cycle_type": str(self.cycle_type),
            "fixed_locus_rank": self.fixed_locus_rank,
            "group": [list(p) for p in self.group_descriptor],
            "group_text": self.group_text(),
            "centralizer_order": self.centralizer_order,
            "coarse_target": f"Sym^{self.coarse_target_rank} X",
            "coarse_factors": self.coarse_text(),
        }


def inertia_components(d: int) -> list[InertiaComponent]:
    out = []
    for ct in partitions(d):
        out.append(
            InertiaComponent(
                cycle_type=ct,
                fixed_locus_rank=ct.N,
                group_descriptor=ct.counts,
                centralizer_order=centralizer_order(ct),
                coarse_target_rank=ct.N,
                coarse_factors=ct.counts,
            )
        )
    return out


# -- gerbe fibers ------------------------------------------------------------------


@dataclass(frozen=True)
class GerbeFiber:
    r: int
    sigma: tuple[int, ...]
    orbits: tuple[tuple[int, int], ...]

    @property
    def coarse_count(self) -> int:
        return len(self.orbits)

    @property
    def representable(self) -> bool:
        return self.r == reduce(math.lcm, (length for length, _ in self.orbits), 1)

    def text(self) -> str:
        return " u ".join(f"Bmu{stab}" for _, stab in self.orbits)

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "sigma": format_permutation(self.sigma),
            "orbits": [{"length": length, "stabilizer": stab} for length, stab in self.orbits],
            "coarse_fiber": self.coarse_count,
            "representable": self.representable,
            "stack": self.text(),
        }


def gerbe_fiber(r: int, sigma: tuple[int, ...]) -> GerbeFiber:
    """mu_r acting on [d] through sigma: one orbit per cycle, stabilizer mu_{r/len}."""
    lengths = sorted((len(c) for c in cycles(sigma)), reverse=True)
    order = reduce(math.lcm, lengths, 1)
    if r < 1 or r % order:
        raise PreconditionError(f"order {order} of sigma does not divide r={r}")
    return GerbeFiber(r, tuple(sigma), tuple((length, r // length) for length in lengths))
