"""Command-line front end.  Every subcommand prints one JSON RunReport.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on bad usage
or invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from . import acceptance
from .checks import Check
from .delta import delta, delta_factor_law
from .equivariant import (
    NAMED_GROUPS,
    VirtualCharacter,
    molien_series,
    named_group,
    parse_rational_function,
    series_compare,
    series_expand,
    sk_invariant_multiplicity,
)
from .errors import KStabError
from .inertia import (
    CycleType,
    brute_centralizer_order,
    centralizer_order,
    cycle_type,
    gerbe_fiber,
    inertia_components,
    parse_permutation,
    representative,
)
from .pullback import (
    PullbackProblem,
    RamifiedPullbackProblem,
    coeff_stratum,
    exp_factorized_coefficient,
    multiple_divisor_class,
    pullback_closed,
    pullback_exp,
    pullback_oracle,
    ramified_pullback,
    stratum_coefficients,
    symmetrize_to_base,
)
from .ring import KExpr, divisor, generator_from_label, normal, parse, pretty, serialize, torsion_reduce
from .strata import (
    Caps,
    Decoration,
    F_polynomial,
    StratumClass,
    canonical_class,
    decoration_type,
    enumerate_decorations,
    render,
    strata_product,
)
from .xi import XiData, degree_e, gamma_order, k_from_dims, validate_xi


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunReport:
    command: str
    inputs: dict
    outputs: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    elapsed_ms: int | None = None

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "checks": [c.as_dict() for c in self.checks],
            "elapsed_ms": self.elapsed_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, default=str)


# -- argument helpers ----------------------------------------------------------------


def _ints(text: str) -> list[int]:
    return [int(a) for a in text.replace(" ", "").split(",") if a]


def _fractions(text: str) -> list[Fraction]:
    return [Fraction(a) for a in text.replace(" ", "").split(",") if a]


def _pairs(text: str) -> dict[str, str]:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(";"))):
        key, _, value = item.partition("=")
        if not _:
            raise UsageError(f"expected key=value in {item!r}")
        out[key.strip()] = value.strip()
    return out


def _caps(args) -> Caps:
    base = Caps.from_env()
    return Caps(
        max_n=args.max_n if args.max_n is not None else base.max_n,
        max_codim=args.max_codim if args.max_codim is not None else base.max_codim,
        max_count=args.max_count if args.max_count is not None else base.max_count,
    )


def _expr_out(e: KExpr, m: int | None = None) -> dict:
    out = {"expr": serialize(e), "pretty": pretty(e)}
    if m is not None:
        out["display"] = render(e, m)
    return out


# -- subcommands -------------------------------------------------------------------------


def cmd_pullback(args, report: RunReport) -> None:
    caps = _caps(args)
    if args.ramified:
        _ramified(args, report, caps)
        return
    if args.exp is not None:
        weights = _fractions(args.exp)
        e = pullback_exp(args.g, args.m, args.n, weights, args.truncation, caps)
        report.outputs["closed"] = _expr_out(e, args.m)
        if args.check_factorization:
            split = stratum_coefficients(e, args.m)
            bad = []
            for deco in enumerate_decorations(args.m, args.n, caps=caps):
                if deco.is_empty():
                    continue
                if split.get(deco, KExpr.const(0, args.truncation)) != exp_factorized_coefficient(weights, deco, args.truncation):
                    bad.append(str(deco))
            report.checks.append(Check("per-stratum coefficients factor over legs", not bad, [], bad))
        return
    p = PullbackProblem(args.g, args.m, args.n, parse(args.G))
    closed = pullback_closed(p, caps)
    report.outputs["closed"] = _expr_out(closed, args.m)
    report.outputs["oracle"] = None
    report.outputs["match"] = None
    if args.coeff is not None:
        deco = Decoration.parse(args.coeff, args.m)
        c = coeff_stratum(p, deco)
        report.outputs["coefficient"] = {"decoration": str(deco), **_expr_out(c)}
        got = stratum_coefficients(closed, args.m).get(deco, KExpr.const(0))
        report.checks.append(Check("coefficient matches closed form", got == c, pretty(c), pretty(got)))
    if args.oracle or args.order:
        order = _ints(args.order) if args.order else None
        oracle = pullback_oracle(p, order)
        same = canonical_class(oracle, p.m, p.n) == canonical_class(closed, p.m, p.n)
        report.outputs["oracle"] = _expr_out(oracle, args.m)
        report.outputs["match"] = same
        report.outputs["raw_match"] = oracle == closed
        report.checks.append(Check("oracle equals closed form", same, True, same))
    if args.canonical:
        report.outputs["canonical"] = serialize(canonical_class(closed, p.m, p.n))


def _ramified(args, report: RunReport, caps: Caps) -> None:
    xi = XiData(args.xi_g, args.xi_d, args.xi_J, args.xi_k, tuple(_ints(args.xi_gamma)))
    edges = {frozenset(_ints(k)): int(v) for k, v in _pairs(args.edge_mult or "").items()}
    legs = tuple(_ints(args.leg_mult)) if args.leg_mult else (1,) * xi.R
    p = RamifiedPullbackProblem(xi, parse(args.G), legs, edges, args.n_override)
    e = ramified_pullback(p, caps)
    report.outputs["xi"] = xi.as_dict()
    report.outputs["pullback"] = _expr_out(e)
    if args.fiber_map:
        fmap = {int(k): int(v) for k, v in _pairs(args.fiber_map).items()}
        report.outputs["base"] = _expr_out(symmetrize_to_base(e, fmap))
    if all(k == 1 for k in legs) and all(k == 1 for k in edges.values()):
        base = symmetrize_to_base(e, {i: i for i in range(1, xi.R + 1)})
        G = symmetrize_to_base(p.G, {i: i for i in range(1, xi.R + 1)}, upstairs_prefix="M")
        closed = pullback_closed(PullbackProblem(xi.g, xi.R, p.forgotten, G), caps)
        report.checks.append(Check("unit multiplicities reduce to the closed form", base == closed, pretty(closed), pretty(base)))


def cmd_delta(args, report: RunReport) -> None:
    if args.torsion_identity is not None:
        m = args.torsion_identity
        tail = _ints(args.tail)
        lhs = multiple_divisor_class(tail, m)
        x, N = KExpr.gen(divisor(tail)), KExpr.gen(normal(tail))
        geometric = torsion_reduce(sum((N**j for j in range(m)), KExpr.const(0)) * x)
        via_delta = torsion_reduce(-delta(N**m, [normal(tail)]) * x)
        report.outputs["class"] = _expr_out(lhs)
        report.outputs["note"] = "1 - (1-x)^m equals -delta(L^m) x; the opposite sign would not hold"
        report.checks += [
            Check("equals (sum_{j<m} L^j) x", lhs == geometric, pretty(geometric), pretty(lhs)),
            Check("equals -delta(L^m) x", lhs == via_delta, pretty(via_delta), pretty(lhs)),
        ]
        return
    if args.expr is None or args.vars is None:
        raise UsageError("delta needs --expr and --vars (or --torsion-identity)")
    gens = [generator_from_label(v.strip()) for v in args.vars.split(",") if v.strip()]
    e = parse(args.expr)
    report.outputs["delta"] = _expr_out(delta(e, gens))
    if args.factor:
        factors = [(e, gens)]
        for spec in args.factor:
            text, _, vs = spec.partition("@")
            factors.append((parse(text), [generator_from_label(v.strip()) for v in vs.split(",") if v.strip()]))
        ok = delta_factor_law(factors)
        report.checks.append(Check("delta of product equals product of deltas", ok, True, ok))


def cmd_decorations(args, report: RunReport) -> None:
    caps = _caps(args)
    if args.product:
        a, b = (StratumClass(Decoration.parse(t, args.m)) for t in args.product)
        report.outputs["product"] = _expr_out(strata_product(a, b), args.m)
        return
    rows = []
    for deco in enumerate_decorations(args.m, args.n, args.max_codim_list, caps):
        row = {"decoration": str(deco), "name": deco.short_name(), "codim": deco.codim}
        row["types"] = [decoration_type(leg) if leg else None for leg in deco.legs]
        row["F"] = [pretty(F_polynomial(leg, deco.normal_vars(i))) for i, leg in enumerate(deco.legs, start=1)]
        rows.append(row)
    report.outputs["count"] = len(rows)
    report.outputs["decorations"] = rows


def cmd_inertia(args, report: RunReport) -> None:
    comps = inertia_components(args.d)
    report.outputs["components"] = [c.as_dict() for c in comps]
    report.outputs["count"] = len(comps)
    if args.brute:
        bad = [str(c.cycle_type) for c in comps if c.centralizer_order != brute_centralizer_order(representative(c.cycle_type))]
        report.checks.append(Check("centralizer orders match brute force", not bad, [], bad))
    total = sum(math.factorial(args.d) // c.centralizer_order for c in comps)
    report.checks.append(Check("class equation", total == math.factorial(args.d), "d!", total))


def cmd_gerbe_fiber(args, report: RunReport) -> None:
    sigma = parse_permutation(args.sigma, args.d)
    fib = gerbe_fiber(args.r, sigma)
    report.outputs.update(fib.as_dict())
    report.outputs["cycle_type"] = str(cycle_type(sigma))
    report.outputs["centralizer_order"] = centralizer_order(cycle_type(sigma))


def cmd_xi(args, report: RunReport) -> None:
    gamma = tuple(_ints(args.gamma))
    k = args.k if args.k is not None else k_from_dims(args.g, len(gamma))
    d = args.d if args.d is not None else args.g + 1
    x = XiData(args.g, d, args.J, k, gamma)
    rep = validate_xi(x)
    report.outputs["xi"] = x.as_dict()
    report.outputs["degree_e"] = degree_e(x)
    report.outputs["notes"] = list(rep.notes)
    report.checks += rep.checks
    if args.group_order:
        order = gamma_order(x)
        report.outputs["gamma_order"] = order
        report.checks.append(Check("|Gamma| equals e", order == degree_e(x), degree_e(x), order))


def _character(text: str) -> VirtualCharacter:
    values = {}
    k = None
    for key, value in _pairs(text).items():
        ct = CycleType.from_parts(_ints(key.replace("+", ",")))
        k = ct.d if k is None else k
        values[ct] = Fraction(value)
    if k is None:
        raise UsageError("empty character")
    return VirtualCharacter.from_mapping(k, values)


def cmd_molien(args, report: RunReport) -> None:
    if args.character:
        chi = _character(args.character)
        report.outputs["character"] = {str(ct): str(v) for ct, v in chi.values}
        report.outputs["invariant_multiplicity"] = str(sk_invariant_multiplicity(chi))
        return
    G = named_group(args.group)
    coeffs = molien_series(G, args.max_degree)
    report.outputs["group"] = args.group
    report.outputs["order"] = G.order
    report.outputs["coeffs"] = [str(c) for c in coeffs]
    report.outputs["match"] = None
    if args.compare:
        num, den = parse_rational_function(args.compare)
        ok = series_compare(coeffs, (num, den), args.max_degree)
        report.outputs["target"] = [str(c) for c in series_expand(num, den, args.max_degree)]
        report.outputs["match"] = ok
        report.checks.append(Check(f"matches {args.compare}", ok, True, ok))


def cmd_verify_all(args, report: RunReport) -> None:
    wanted = set(_ints(args.criteria)) if args.criteria else None
    t0 = time.perf_counter()
    results = [acceptance.run_criterion(num) for num, *_ in acceptance.CRITERIA if wanted is None or num in wanted]
    total = time.perf_counter() - t0
    report.outputs["criteria"] = [r.as_dict(args.timing) for r in results]
    for r in results:
        failed = [c.name for c in r.checks if not c.passed]
        actual = failed if failed else ("over budget" if not r.within_budget else "ok")
        report.checks.append(Check(f"criterion {r.number}: {r.title}", r.passed, "ok", actual))
        if not args.quiet:
            print(r.line(), file=sys.stderr)
    if wanted is None:
        under = total < 120
        report.checks.append(Check("criterion 12: suite runs under 2 minutes", under, "< 120 s", "ok" if under else "exceeded"))


# -- parser and dispatch ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--human", action="store_true", help="aligned text instead of JSON")
    common.add_argument("--timing", action="store_true", help="record elapsed_ms (output is then not byte-stable)")
    common.add_argument("--max-n", type=int, default=None)
    common.add_argument("--max-codim", type=int, default=None)
    common.add_argument("--max-count", type=int, default=None)

    parser = _Parser(prog="kstab", description="Stabilization calculus for psi classes in K-theory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pullback", parents=[common], help="pull back G(L_1..L_m) along forgetting n points")
    p.add_argument("--g", type=int, default=0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--G", default="L1")
    p.add_argument("--oracle", action="store_true", help="also run the one-point-at-a-time oracle")
    p.add_argument("--order", help="forget order for the oracle, e.g. 3,2")
    p.add_argument("--coeff", help="decoration whose coefficient to extract, e.g. '(2)(3)'")
    p.add_argument("--canonical", action="store_true", help="print the canonical class")
    p.add_argument("--exp", help="weights r_i: pull back exp(t sum r_i L_i)")
    p.add_argument("--truncation", type=int, default=3, help="order in t for --exp")
    p.add_argument("--check-factorization", action="store_true")
    p.add_argument("--ramified", action="store_true", help="pull back along a cover with data Xi")
    p.add_argument("--xi-g", type=int, default=0)
    p.add_argument("--xi-d", type=int, default=1)
    p.add_argument("--xi-J", type=int, default=0)
    p.add_argument("--xi-k", type=int, default=0)
    p.add_argument("--xi-gamma", default="1")
    p.add_argument("--leg-mult", help="m(t_i) per leg, e.g. 2,1")
    p.add_argument("--edge-mult", help="m(e) per tail, e.g. '1,2=2; 1,2,3=3'")
    p.add_argument("--n-override", type=int, default=None, help="points forgotten (default: A-size of Xi)")
    p.add_argument("--fiber-map", help="upstairs leg to base leg, e.g. '1=1; 2=1'")

    p = sub.add_parser("delta", parents=[common], help="apply the difference operator")
    p.add_argument("--expr")
    p.add_argument("--vars", help="comma-separated active variables")
    p.add_argument("--factor", action="append", help="extra factor 'EXPR@VARS' for the product law")
    p.add_argument("--torsion-identity", type=int, default=None, metavar="M", help="check O_{mD} against delta")
    p.add_argument("--tail", default="1,2")

    p = sub.add_parser("decorations", parents=[common], help="enumerate rational-tail decorations")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--codim", dest="max_codim_list", type=int, default=None, help="list only codim <= this")
    p.add_argument("--product", nargs=2, metavar="DECO", help="intersect two strata")

    p = sub.add_parser("inertia", parents=[common], help="components of the inertia of Sym^d X")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--brute", action="store_true", help="cross-check centralizers by enumeration")

    p = sub.add_parser("gerbe-fiber", parents=[common], help="mu_r acting on [d] through sigma")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--d", type=int, default=None)

    p = sub.add_parser("xi", parents=[common], help="validate the discrete data of a cover")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--J", type=int, default=0)
    p.add_argument("--k", type=int, default=None, help="default: from dimension matching")
    p.add_argument("--gamma", required=True)
    p.add_argument("--group-order", action="store_true", help="compute |Gamma| independently")

    p = sub.add_parser("molien", parents=[common], help="Molien series and S_k invariants")
    p.add_argument("--group", default="s3-standard", choices=sorted(NAMED_GROUPS))
    p.add_argument("--max-degree", type=int, default=20)
    p.add_argument("--compare")
    p.add_argument("--character", help="virtual S_k character, e.g. '1+1+1=2; 2+1=0; 3=-1'")

    p = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    p.add_argument("--criteria", help="subset, e.g. 1,5")
    p.add_argument("--quiet", action="store_true")
    return parser


COMMANDS = {
    "pullback": cmd_pullback,
    "delta": cmd_delta,
    "decorations": cmd_decorations,
    "inertia": cmd_inertia,
    "gerbe-fiber": cmd_gerbe_fiber,
    "xi": cmd_xi,
    "molien": cmd_molien,
    "verify-all": cmd_verify_all,
}

# operation -> (name called from this module, an argv that reaches it)
OPERATION_COVERAGE: dict[str, tuple[str, list[str]]] = {
    "formal-ring.parse": ("parse", ["pullback", "--m", "1", "--n", "1", "--G", "L1^2"]),
    "formal-ring.serialize": ("serialize", ["pullback", "--m", "1", "--n", "1"]),
    "formal-ring.torsion_reduce": ("torsion_reduce", ["delta", "--torsion-identity", "3"]),
    "strata.enumerate_decorations": ("enumerate_decorations", ["decorations", "--m", "1", "--n", "2"]),
    "strata.decoration_type": ("decoration_type", ["decorations", "--m", "1", "--n", "3"]),
    "strata.F_polynomial": ("F_polynomial", ["decorations", "--m", "1", "--n", "2"]),
    "strata.strata_product": ("strata_product", ["decorations", "--m", "1", "--product", "(2)", "(2,3)"]),
    "strata.canonical_class": ("canonical_class", ["pullback", "--m", "1", "--n", "2", "--oracle"]),
    "delta.delta": ("delta", ["delta", "--expr", "L11*L12", "--vars", "L11,L12"]),
    "delta.delta_factor_law": ("delta_factor_law", ["delta", "--expr", "1+x1", "--vars", "x1", "--factor", "x2^2@x2"]),
    "pullback.pullback_closed": ("pullback_closed", ["pullback", "--m", "1", "--n", "2"]),
    "pullback.pullback_oracle": ("pullback_oracle", ["pullback", "--m", "1", "--n", "2", "--order", "3,2"]),
    "pullback.coeff_stratum": ("coeff_stratum", ["pullback", "--m", "1", "--n", "2", "--coeff", "(2)(3)"]),
    "pullback.pullback_exp": ("pullback_exp", ["pullback", "--m", "1", "--n", "1", "--exp", "1", "--truncation", "2"]),
    "pullback.ramified_pullback": ("ramified_pullback", ["pullback", "--ramified", "--G", "M1", "--leg-mult", "2"]),
    "pullback.symmetrize_to_base": ("symmetrize_to_base", ["pullback", "--ramified", "--G", "M1", "--fiber-map", "1=1"]),
    "pullback.multiple_divisor_class": ("multiple_divisor_class", ["delta", "--torsion-identity", "2"]),
    "inertia.inertia_components": ("inertia_components", ["inertia", "--d", "5"]),
    "inertia.centralizer_order": ("centralizer_order", ["gerbe-fiber", "--r", "2", "--sigma", "(1 2)"]),
    "inertia.gerbe_fiber": ("gerbe_fiber", ["gerbe-fiber", "--r", "4", "--sigma", "(1 2)(3 4)", "--d", "5"]),
    "inertia.brute_centralizer_order": ("brute_centralizer_order", ["inertia", "--d", "4", "--brute"]),
    "xi.validate_xi": ("validate_xi", ["xi", "--g", "1", "--d", "2", "--J", "0", "--k", "3", "--gamma", "2"]),
    "xi.k_from_dims": ("k_from_dims", ["xi", "--g", "1", "--gamma", "2"]),
    "xi.degree_e": ("degree_e", ["xi", "--g", "1", "--gamma", "2"]),
    "xi.gamma_order": ("gamma_order", ["xi", "--g", "1", "--gamma", "2", "--group-order"]),
    "equivariant.molien_series": ("molien_series", ["molien", "--max-degree", "5"]),
    "equivariant.series_compare": ("series_compare", ["molien", "--compare", "1/((1-q^2)(1-q^3))"]),
    "equivariant.sk_invariant_multiplicity": ("sk_invariant_multiplicity", ["molien", "--character", "1+1+1=6; 2+1=0; 3=0"]),
}


def _render_human(report: RunReport) -> str:
    lines = [f"== {report.command} =="]

    def table(rows: list[dict]) -> list[str]:
        keys = list(rows[0])
        cells = [[str(r.get(k, "")) for k in keys] for r in rows]
        widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
        out = ["  ".join(k.ljust(w) for k, w in zip(keys, widths)).rstrip()]
        out += ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
        return out

    for key, value in report.outputs.items():
        if isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            lines.append(f"{key}:")
            lines += ["  " + s for s in table([{k: v for k, v in row.items() if not isinstance(v, (list, dict))} for row in value])]
        elif isinstance(value, dict) and "display" in value:
            lines.append(f"{key}: {value['display']}")
        elif isinstance(value, dict) and "pretty" in value:
            lines.append(f"{key}: {value['pretty']}")
        else:
            lines.append(f"{key}: {value}")
    if report.checks:
        lines.append("checks:")
        lines += ["  " + s for s in table([{"check": c.name, "pass": c.passed} for c in report.checks])]
    if report.elapsed_ms is not None:
        lines.append(f"elapsed: {report.elapsed_ms} ms")
    return "\n".join(lines)


def run(argv: Sequence[str] | None = None) -> tuple[RunReport | None, int]:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return None, 2
    inputs = {k: v for k, v in vars(args).items() if k not in ("command", "human", "timing", "quiet")}
    report = RunReport(args.command, inputs)
    t0 = time.perf_counter()
    try:
        COMMANDS[args.command](args, report)
    except (UsageError, KStabError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return report, 2
    if args.timing:
        report.elapsed_ms = round((time.perf_counter() - t0) * 1000)
    print(_render_human(report) if args.human else report.to_json())
    return report, 0 if report.ok else 1


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)[1]


if __name__ == "__main__":
    sys.exit(main())
