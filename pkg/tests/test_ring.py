from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kstab.errors import (
    ArithmeticLimitError,
    NonInvertibleSubstitutionError,
    ParseError,
    UnresolvedRelationError,
)
from kstab.ring import (
    KExpr,
    Kind,
    divisor,
    from_json,
    line,
    normal,
    parse,
    pretty,
    serialize,
    series_var,
    substitute,
    to_json,
    torsion_reduce,
    unit_inverse,
)

L1, L2 = KExpr.gen(line(1)), KExpr.gen(line(2))
q = KExpr.gen(series_var("q"))
x = KExpr.gen(divisor({1, 2}))
y = KExpr.gen(divisor({1, 2, 3}))
N = KExpr.gen(normal({1, 2}))


def test_difference_of_squares():
    assert (L1 + 1) * (L1 - 1) == L1**2 - 1


def test_additive_inverse_is_empty():
    z = x + (-1) * x
    assert z.is_zero() and len(z) == 0 and serialize(z) == "0"


def test_truncated_product():
    a = KExpr((1 + q + q**2).terms, truncation=2)
    assert a * (1 + q) == KExpr((1 + 2 * q + 2 * q**2).terms, truncation=2)


def test_truncation_is_min_under_multiplication():
    a = KExpr((1 + q).terms, truncation=3)
    b = KExpr((1 + q).terms, truncation=1)
    assert (a * b).truncation == 1
    assert (a * b) == KExpr((1 + 2 * q).terms, truncation=1)


def test_negative_exponents_only_on_line_bundles():
    assert (L1**-1 * L1) == KExpr.const(1)
    with pytest.raises(ValueError):
        KExpr({((divisor({1, 2}), -1),): 1})


def test_exponent_bound():
    with pytest.raises(ArithmeticLimitError):
        L1**20_000


def test_self_intersection():
    assert torsion_reduce(x**2) == (1 - N) * x


def test_cube():
    assert torsion_reduce(x**3) == (1 - N) ** 2 * x


def test_multiple_class_m3():
    assert torsion_reduce(1 - (1 - x) ** 3) == torsion_reduce((1 + N + N**2) * x)


@pytest.mark.parametrize("m", range(1, 11))
def test_multiple_class_geometric_sum(m):
    lhs = torsion_reduce(1 - (1 - x) ** m)
    rhs = sum((N**j for j in range(m)), KExpr.const(0)) * x
    assert lhs == rhs


def test_reduce_is_idempotent():
    e = torsion_reduce((x + y) ** 4)
    assert torsion_reduce(e) == e


def test_missing_relation():
    with pytest.raises(UnresolvedRelationError):
        torsion_reduce(x**2 * y**2, {divisor({1, 2}): 1 - N})


def test_substitute_examples():
    assert substitute(L1**5 - 1, {line(1): 1}).is_zero()
    assert substitute(x * y, {divisor({1, 2}): 1 - KExpr.gen(normal({1, 1}))}) == (1 - KExpr.gen(normal({1, 1}))) * y
    t = KExpr((1 + q).terms, truncation=3)
    assert substitute(t, {series_var("q"): q**2}) == KExpr((1 + q**2).terms, truncation=3)


def test_substitute_is_simultaneous():
    assert substitute(L1 * L2, {line(1): L2, line(2): L1}) == L1 * L2
    assert substitute(L1**2, {line(1): L1 - x}) == L1**2 - 2 * L1 * x + x**2


def test_inverse_needs_a_unit():
    assert substitute(L1**-2, {line(1): 3 * L2}) == KExpr({((line(2), -2),): Fraction(1, 9)})
    with pytest.raises(NonInvertibleSubstitutionError):
        substitute(L1**-1, {line(1): 1 - L2})
    assert unit_inverse(2 * L1) * (2 * L1) == KExpr.const(1)


@pytest.mark.parametrize(
    "text",
    ["0", "L1 - D[1,2]", "(1 - N[1,2])*D[1,2]", "1/2*L1^3*q - 7", "L1^-2 + L2", "1 + q + q^2 + O(3)"],
)
def test_round_trip(text):
    e = parse(text)
    assert parse(serialize(e)) == e
    assert parse(pretty(e)) == e
    assert from_json(to_json(e)) == e
    assert serialize(parse(serialize(e))) == serialize(e)


def test_serialize_sorted():
    assert serialize(parse("D[1,2] - N[1,2]*D[1,2]")) == serialize(parse("-D[1,2]*N[1,2] + D[1,2]"))


def test_generator_kinds():
    kinds = {g.label: g.kind for g in parse("L1*N[1,2]*D[1,2]*q").generators}
    assert kinds == {"L1": Kind.LINE_BUNDLE, "N[1,2]": Kind.NORMAL_BUNDLE, "D[1,2]": Kind.STRATUM_TORSION, "q": Kind.SERIES_VAR}


@pytest.mark.parametrize("bad,pos", [("L1 +", 4), ("(L1", 3), ("L1 ^ x", 5), ("2 * * L1", 4)])
def test_parse_errors_carry_position(bad, pos):
    with pytest.raises(ParseError) as info:
        parse(bad)
    assert info.value.position == pos


# -- property tests --------------------------------------------------------------------

GENS = [line(1), line(2), normal({1, 2}), series_var("q")]


@st.composite
def kexprs(draw):
    terms = {}
    for _ in range(draw(st.integers(0, 4))):
        mono = []
        for g in GENS:
            lo = -2 if g.kind == Kind.LINE_BUNDLE else 0
            k = draw(st.integers(lo, 2))
            if k:
                mono.append((g, k))
        terms[tuple(mono)] = draw(st.integers(-4, 4))
    return KExpr(terms)


@settings(max_examples=60, deadline=None)
@given(kexprs(), kexprs(), kexprs())
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == KExpr.const(0)


@settings(max_examples=60, deadline=None)
@given(kexprs())
def test_identity_substitution(a):
    assert substitute(a, {g: KExpr.gen(g) for g in GENS}) == a


@settings(max_examples=60, deadline=None)
@given(kexprs())
def test_text_round_trip(a):
    assert parse(serialize(a)) == a


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from([x, y, 1 - x, L1 * y, N * x, 1 + y]), min_size=1, max_size=5))
def test_reduction_is_confluent(factors):
    # reducing after each multiplication or only at the end gives the same form
    whole = KExpr.const(1)
    stepwise = KExpr.const(1)
    for f in factors:
        whole = whole * f
        stepwise = torsion_reduce(stepwise * f)
    reverse = KExpr.const(1)
    for f in reversed(factors):
        reverse = torsion_reduce(reverse * f)
    assert torsion_reduce(whole) == stepwise == reverse
