import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kstab.errors import ArityError, DomainError, EnumerationLimitError, InvalidDecorationError
from kstab.ring import KExpr, divisor, line, normal, substitute
from kstab.strata import (
    Caps,
    Decoration,
    F_polynomial,
    StratumClass,
    canonical_class,
    decoration_type,
    enumerate_decorations,
    forgetful_image_stable,
    normalize,
    render,
    strata_product,
)


def D(*tail):
    return KExpr.gen(divisor(tail))


def N(*tail):
    return KExpr.gen(normal(tail))


def deco(text, m=1):
    return Decoration.parse(text, m)


def test_enumerate_small():
    assert [str(d) for d in enumerate_decorations(1, 1)] == ["-", "(2)"]
    got = {str(d) for d in enumerate_decorations(1, 2)}
    assert got == {"-", "(2)", "(3)", "(2,3)", "(2)(3)", "(3)(2)"}
    assert len(enumerate_decorations(1, 2, max_codim=1)) == 4


def brute_count(m, n, max_codim):
    """Assign each label a (leg, level) or nothing; keep assignments whose levels are 1..r per leg."""
    choices = [None] + [(i, lvl) for i in range(1, m + 1) for lvl in range(1, n + 1)]
    count = 0
    for assign in itertools.product(choices, repeat=n):
        levels = {i: {c[1] for c in assign if c and c[0] == i} for i in range(1, m + 1)}
        if all(lv == set(range(1, len(lv) + 1)) for lv in levels.values()):
            if sum(len(lv) for lv in levels.values()) <= max_codim:
                count += 1
    return count


@pytest.mark.parametrize("m,n", [(1, 0), (1, 1), (1, 2), (1, 3), (1, 4), (1, 5), (2, 2), (2, 3), (3, 2)])
def test_count_matches_brute_force(m, n):
    assert len(enumerate_decorations(m, n)) == brute_count(m, n, n)
    if n >= 2:
        assert len(enumerate_decorations(m, n, max_codim=1)) == brute_count(m, n, 1)


def test_enumeration_is_duplicate_free_and_sorted():
    decos = enumerate_decorations(2, 3)
    assert len(set(decos)) == len(decos)
    assert [d.codim for d in decos] == sorted(d.codim for d in decos)


def test_caps():
    with pytest.raises(EnumerationLimitError):
        enumerate_decorations(1, 4, caps=Caps(max_n=3))
    with pytest.raises(EnumerationLimitError):
        enumerate_decorations(2, 6, caps=Caps(max_count=100))


def test_caps_from_env(monkeypatch):
    monkeypatch.setenv("KSTAB_MAX_N", "2")
    with pytest.raises(EnumerationLimitError):
        enumerate_decorations(1, 3)


def test_invalid_decorations():
    for legs in [(((2,), (2,)),), (((3, 2),),), (((1,),),), (((),),)]:
        with pytest.raises(InvalidDecorationError):
            Decoration(legs)


def test_figure_decoration():
    d = Decoration.parse("(4)(8)(5,7,14) | (6)(10,12,13)(11) | (9)")
    assert d.m == 3 and d.codim == 7
    assert [decoration_type(leg) for leg in d.legs] == [0, 0, 0]
    assert Decoration.parse(str(d)) == d


@pytest.mark.parametrize(
    "leg,expected",
    [
        (((2,), (3,)), 0),
        (((3,), (2,)), (2,)),
        (((4,), (3,), (2,)), (2, 3)),
        (((2, 3),), 0),
        (((3,), (2,), (4,)), (2,)),
    ],
)
def test_types(leg, expected):
    assert decoration_type(leg) == expected


def test_every_leg_has_exactly_one_type():
    for d in enumerate_decorations(1, 4):
        if not d.is_empty():
            t = decoration_type(d.legs[0])
            assert t == 0 or (isinstance(t, tuple) and t and t[0] > 1 and list(t) == sorted(set(t)))


def test_F_examples():
    x1, x2 = normal({1, 2}), normal({1, 2, 3})
    assert F_polynomial(((2,), (3,)), [x1, x2]) == 1 - N(1, 2) * N(1, 2, 3)
    assert F_polynomial(((2,),), [x1]) == 1 - N(1, 2)
    assert F_polynomial(((2,), (3,)), [x1, x2], [2, 1]) == 1 - N(1, 2) ** 2 * N(1, 2, 3)
    assert F_polynomial(((3,), (2,)), [normal({1, 3}), x2]) == 2 - N(1, 3) - N(1, 2, 3)
    with pytest.raises(ArityError):
        F_polynomial(((2,), (3,)), [x1])


def test_F_vanishes_at_one():
    for d in enumerate_decorations(1, 4):
        if d.is_empty():
            continue
        vs = d.normal_vars(1)
        F = F_polynomial(d.legs[0], vs)
        assert substitute(F, {v: 1 for v in vs}).is_zero()


def test_products():
    s = lambda t: StratumClass(deco(t))
    assert strata_product(s("(2)"), s("(3)")).is_zero()
    assert strata_product(s("(2)"), s("(2)")) == (1 - N(1, 2)) * D(1, 2)
    assert strata_product(s("(2)"), s("(2,3)")) == D(1, 2) * D(1, 2, 3)
    assert s("(2)(3)").expr() == D(1, 2) * D(1, 2, 3)


def test_disjoint_legs_meet():
    a = StratumClass(deco("(3) | -", 2))
    b = StratumClass(deco("- | (4)", 2))
    assert strata_product(a, b) == D(1, 3) * D(2, 4)


STRATA_13 = [StratumClass(d) for d in enumerate_decorations(1, 3)]


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(STRATA_13), st.sampled_from(STRATA_13), st.sampled_from(STRATA_13))
def test_product_commutative_associative(a, b, c):
    assert strata_product(a, b) == strata_product(b, a)
    left = normalize(strata_product(a, b) * c.expr())
    right = normalize(a.expr() * strata_product(b, c))
    assert left == right


def test_stability():
    assert forgetful_image_stable(deco("(2)"), 2, (0, 3)) is False
    assert forgetful_image_stable(deco("(2,3)"), 3, (0, 3)) is True
    assert forgetful_image_stable(deco("-"), 3, (0, 3)) is True
    with pytest.raises(DomainError):
        forgetful_image_stable(deco("(2)"), 1, (0, 3))


def test_render_display():
    e = KExpr.gen(line(1)) - D(1, 2) - D(1, 3) - D(1, 2, 3) + D(1, 2) * D(1, 2, 3)
    assert render(e, 1) == "L1 - O_D_{12} - O_D_{123} - O_D_{13} + O_D_{(12)(3)}"


def test_canonical_class_kills_relations():
    # a Keel-type relation on the tail {1,2,3}: D123 (1 - D12) == D123 (1 - D13)
    lhs = canonical_class(D(1, 2, 3) * (1 - D(1, 2)), 1, 3)
    rhs = canonical_class(D(1, 2, 3) * (1 - D(1, 3)), 1, 3)
    assert lhs == rhs
    assert canonical_class(D(1, 2), 1, 3) != canonical_class(D(1, 3), 1, 3)
