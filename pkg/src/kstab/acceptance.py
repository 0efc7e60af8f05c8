"""The acceptance suite: one function per criterion, each returning its checks."""

from __future__ import annotations

import itertools
import random
import time
from collections.abc import Callable
from dataclasses import dataclass

from .checks import Check
from .delta import delta, delta_factor_law
from .equivariant import molien_series, s3_standard, series_compare
from .inertia import (
    brute_centralizer_order,
    centralizer_order,
    cycle_type,
    gerbe_fiber,
    parse_permutation,
    partitions,
    representative,
)
from .pullback import (
    PullbackProblem,
    RamifiedPullbackProblem,
    coeff_stratum,
    downstairs,
    multiple_divisor_class,
    pullback_closed,
    pullback_oracle,
    ramified_pullback,
    stratum_coefficients,
    symmetrize_to_base,
)
from .ring import KExpr, divisor, line, normal, pretty, torsion_reduce
from .strata import canonical_class, decoration_type, enumerate_decorations, render
from .xi import XiData, degree_e, gamma_order, k_from_dims, validate_xi

L1 = KExpr.gen(line(1))


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    checks: tuple[Check, ...]
    elapsed_s: float
    budget_s: float | None

    @property
    def within_budget(self) -> bool:
        return self.budget_s is None or self.elapsed_s < self.budget_s

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks) and self.within_budget

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [c.name for c in self.checks if not c.passed]
        extra = f" failed={failed}" if failed else ""
        if not self.within_budget:
            extra += f" over budget ({self.elapsed_s:.2f}s >= {self.budget_s}s)"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({len(self.checks)} checks, {self.elapsed_s:.2f}s){extra}"

    def as_dict(self, timing: bool = False) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "pass": self.passed,
            "budget_s": self.budget_s,
            "elapsed_ms": round(self.elapsed_s * 1000) if timing else None,
            "checks": [c.as_dict() for c in self.checks],
        }


def _eq(name: str, expected: KExpr, actual: KExpr) -> Check:
    return Check(name, expected == actual, pretty(expected), pretty(actual))


def _problem(m: int, n: int, G) -> PullbackProblem:
    return PullbackProblem(0, m, n, KExpr.coerce(G))


def criterion_1() -> list[Check]:
    D = lambda *s: KExpr.gen(divisor(s))
    expected = L1 - D(1, 2) - D(1, 3) - D(1, 2, 3) + D(1, 2) * D(1, 2, 3)
    got = pullback_closed(_problem(1, 2, L1))
    display = "L1 - O_D_{12} - O_D_{123} - O_D_{13} + O_D_{(12)(3)}"
    return [_eq("closed form equals display", expected, got), Check("rendered display", render(got, 1) == display, display, render(got, 1))]


def criterion_2() -> list[Check]:
    checks = []
    for G in (L1, L1**2):
        p = _problem(1, 3, G)
        closed = canonical_class(pullback_closed(p), 1, 3)
        for order in itertools.permutations((2, 3, 4)):
            got = canonical_class(pullback_oracle(p, order), 1, 3)
            checks.append(_eq(f"G={pretty(G)} order={order}", closed, got))
    return checks


def _coeff_grid():
    for n in range(1, 4):
        for k in range(1, 5):
            yield n, k


def criterion_3() -> list[Check]:
    checks = []
    for n, k in _coeff_grid():
        p = _problem(1, n, L1**k)
        split = stratum_coefficients(pullback_closed(p), 1)
        bad = []
        for deco in enumerate_decorations(1, n):
            want = coeff_stratum(p, deco)
            if split.get(deco, KExpr.const(0)) != want:
                bad.append(str(deco))
        checks.append(Check(f"n={n} G=L1^{k}", not bad, [], bad))
    return checks


def criterion_4() -> list[Check]:
    checks = []
    for n in range(1, 5):
        split = stratum_coefficients(pullback_closed(_problem(1, n, L1)), 1)
        bad = []
        for deco in enumerate_decorations(1, n):
            if deco.is_empty():
                continue
            want = KExpr.const((-1) ** deco.codim) if decoration_type(deco.legs[0]) == 0 else KExpr.const(0)
            if split.get(deco, KExpr.const(0)) != want:
                bad.append(str(deco))
        checks.append(Check(f"n={n}", not bad and split.get(enumerate_decorations(1, 0)[0]) == L1, [], bad))
    return checks


def criterion_5() -> list[Check]:
    tail = (1, 2)
    x = KExpr.gen(divisor(tail))
    N = KExpr.gen(normal(tail))
    checks = []
    for m in range(1, 11):
        lhs = multiple_divisor_class(tail, m)
        geometric = torsion_reduce(sum((N**j for j in range(m)), KExpr.const(0)) * x)
        via_delta = torsion_reduce(-delta(N**m, [normal(tail)]) * x)
        checks.append(_eq(f"m={m} geometric sum", geometric, lhs))
        checks.append(_eq(f"m={m} minus delta", via_delta, lhs))
    return checks


def _random_poly(rng: random.Random, gens, max_deg: int) -> KExpr:
    total = KExpr.const(0)
    for _ in range(rng.randint(1, 4)):
        term = KExpr.const(rng.randint(-5, 5))
        for g in gens:
            term = term * KExpr.gen(g) ** rng.randint(0, max_deg) if rng.random() < 0.6 else term
        total = total + term
    return total


def criterion_6(instances: int = 200, seed: int = 20240611) -> list[Check]:
    checks = []
    for m in range(1, 11):
        x = line(1, "x")
        want = -sum((KExpr.gen(x) ** j for j in range(m)), KExpr.const(0))
        checks.append(_eq(f"delta(x^{m})", want, delta(KExpr.gen(x) ** m, [x])))
    rng = random.Random(seed)
    bad = []
    for trial in range(instances):
        nfac = rng.randint(2, 3)
        factors = []
        label = 0
        for _ in range(nfac):
            vs = []
            for _ in range(rng.randint(1, 2)):
                label += 1
                vs.append(line(label, "x"))
            spectators = [line(1), line(2)]
            factors.append((_random_poly(rng, vs + spectators[: rng.randint(0, 1)], 4), vs))
        if not delta_factor_law(factors):
            bad.append(trial)
    checks.append(Check(f"factor law on {instances} random instances", not bad, [], bad))
    return checks


def _unit_xi() -> XiData:
    # R = 1: a single point over infinity, unramified
    return XiData(0, 1, 0, 0, (1,))


def criterion_7() -> list[Check]:
    checks = []
    M1 = KExpr.gen(downstairs(1))
    for n, k in _coeff_grid():
        closed = pullback_closed(_problem(1, n, L1**k))
        ram = ramified_pullback(RamifiedPullbackProblem(_unit_xi(), M1**k, (1,), n=n))
        checks.append(_eq(f"n={n} G=M1^{k}", closed, symmetrize_to_base(ram, {1: 1})))
    lead = ramified_pullback(RamifiedPullbackProblem(_unit_xi(), M1, (2,), n=0))
    checks.append(_eq("leading term m(t1)=2", L1**2, symmetrize_to_base(lead, {1: 1})))
    return checks


FIVE = ["5", "4+1", "3+2", "3+1+1", "2+2+1", "2+1+1+1", "1+1+1+1+1"]


def criterion_8() -> list[Check]:
    got = [str(p) for p in partitions(5)]
    checks = [Check("d=5 partitions", got == FIVE, FIVE, got)]
    bad = []
    for d in range(1, 8):
        for ct in partitions(d):
            if centralizer_order(ct) != brute_centralizer_order(representative(ct)):
                bad.append(str(ct))
    checks.append(Check("formula equals brute force, d <= 7", not bad, [], bad))
    s5 = parse_permutation("(12)(34)(5)")
    checks.append(Check("2+2+1 in S5", centralizer_order(cycle_type(s5)) == brute_centralizer_order(s5) == 8, 8,
                        brute_centralizer_order(s5)))
    s9 = parse_permutation("(234)(761)(5)(89)")
    brute9 = brute_centralizer_order(s9)
    checks.append(Check("3+3+2+1 in S9", centralizer_order(cycle_type(s9)) == brute9 == 36, 36, brute9))
    return checks


def criterion_9() -> list[Check]:
    fib = gerbe_fiber(4, parse_permutation("(12)(34)(5)"))
    return [
        Check("orbits", fib.orbits == ((2, 2), (2, 2), (1, 4)), "Bmu2 u Bmu2 u Bmu4", fib.text()),
        Check("coarse fiber", fib.coarse_count == 3, 3, fib.coarse_count),
        Check("not representable", not fib.representable, False, fib.representable),
    ]


def criterion_10() -> list[Check]:
    c = molien_series(s3_standard(), 20)
    target = "1/((1-q^2)(1-q^3))"
    return [
        Check("series through q^20", series_compare(c, target, 20), target, [str(a) for a in c]),
        Check("c1 = 0", c[1] == 0, 0, str(c[1])),
        Check("c2 = c3 = 1", c[2] == c[3] == 1, [1, 1], [str(c[2]), str(c[3])]),
    ]


def criterion_11() -> list[Check]:
    k = k_from_dims(1, 1)
    x = XiData(1, 2, 0, k, (2,))
    report = validate_xi(x)
    checks = [
        Check("k from dimensions", k == 3, 3, k),
        Check("elliptic data valid", report.ok, [], report.failed()),
        Check("degree e = |S3|", degree_e(x) == 6, 6, degree_e(x)),
    ]
    bad = []
    for g in range(5):
        for kk in range(5):
            for J in range(4):
                y = XiData(g, g + 1, J, kk, (1,) * (g + 1))
                if gamma_order(y) != degree_e(y):
                    bad.append([g, kk, J])
    checks.append(Check("|Gamma| equals e on the grid", not bad, [], bad))
    return checks


CRITERIA: list[tuple[int, str, Callable[[], list[Check]], float | None]] = [
    (1, "n=2 pullback display", criterion_1, 1.0),
    (2, "order independence, m=1 n=3", criterion_2, 10.0),
    (3, "per-stratum coefficients, n<=3, G=L1^k", criterion_3, 30.0),
    (4, "sign law for pi^* L1, n<=4", criterion_4, None),
    (5, "torsion identity, m<=10", criterion_5, None),
    (6, "delta laws", criterion_6, None),
    (7, "ramified specialization", criterion_7, None),
    (8, "inertia of Sym^5 and centralizers", criterion_8, 20.0),
    (9, "gerbe fiber r=4", criterion_9, None),
    (10, "Molien series of S3", criterion_10, 1.0),
    (11, "Xi bookkeeping", criterion_11, None),
]


def run_criterion(number: int) -> CriterionResult:
    for num, title, fn, budget in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                checks = fn()
            except Exception as exc:  # a crash is a failed criterion, not a crashed suite
                checks = [Check("raised", False, "no exception", f"{type(exc).__name__}: {exc}")]
            return CriterionResult(num, title, tuple(checks), time.perf_counter() - t0, budget)
    raise KeyError(number)


def run_all() -> list[CriterionResult]:
    return [run_criterion(num) for num, *_ in CRITERIA]
