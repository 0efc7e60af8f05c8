import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kstab.errors import DomainError, ParseError, PreconditionError
from kstab.inertia import (
    CycleType,
    brute_centralizer_order,
    centralizer_order,
    cycle_type,
    cycles,
    format_permutation,
    gerbe_fiber,
    inertia_components,
    parse_permutation,
    partitions,
    representative,
)


def test_degree_five():
    assert [str(p) for p in partitions(5)] == ["5", "4+1", "3+2", "3+1+1", "2+2+1", "2+1+1+1", "1+1+1+1+1"]


def brute_partitions(d):
    found = set()
    for k in range(1, d + 1):
        for parts in itertools.product(range(1, d + 1), repeat=k):
            if sum(parts) == d:
                found.add(tuple(sorted(parts, reverse=True)))
    return found


@pytest.mark.parametrize("d", range(1, 8))
def test_partitions_brute(d):
    got = [p.parts for p in partitions(d)]
    assert len(got) == len(set(got))
    assert set(got) == brute_partitions(d)
    assert got == sorted(got, reverse=True)


def test_partition_counts():
    assert [str(p) for p in partitions(1)] == ["1"]
    assert len(partitions(9)) == 30
    with pytest.raises(DomainError):
        partitions(0)


def test_cycle_type_fields():
    ct = CycleType.from_parts([3, 3, 2, 1])
    assert ct.d == 9 and ct.N == 4 and ct.t == 3 and ct.count(3) == 2
    with pytest.raises(DomainError):
        CycleType(5, ((2, 1),))


@pytest.mark.parametrize(
    "text,d,order",
    [("(12)(34)(5)", None, 8), ("(234)(761)(5)(89)", None, 36), ("()", 4, 24), ("(1 2)(3 4)", 5, 8)],
)
def test_centralizer_examples(text, d, order):
    assert centralizer_order(cycle_type(parse_permutation(text, d))) == order


def test_centralizer_brute_spot_checks():
    assert brute_centralizer_order(parse_permutation("(12)(34)(5)")) == 8


@pytest.mark.parametrize("d", range(1, 8))
def test_centralizer_formula_vs_brute(d):
    for ct in partitions(d):
        assert centralizer_order(ct) == brute_centralizer_order(representative(ct))


@pytest.mark.parametrize("d", range(1, 10))
def test_class_equation(d):
    assert sum(math.factorial(d) // centralizer_order(ct) for ct in partitions(d)) == math.factorial(d)


def test_brute_class_sizes_d5():
    sizes = {}
    for p in itertools.permutations(range(1, 6)):
        ct = cycle_type(p)
        sizes[ct] = sizes.get(ct, 0) + 1
    assert all(sizes[ct] == 120 // centralizer_order(ct) for ct in partitions(5))


def test_permutation_formats():
    a = parse_permutation("(1 2)(3 4)", 5)
    assert a == parse_permutation("(12)(34)(5)") == parse_permutation("(1,2)(3,4)", 5)
    assert format_permutation(a) == "(1 2)(3 4)(5)"
    assert parse_permutation("(10 11)", 11)[9] == 11
    for bad in ["(1 2", "(1 1)", "1 2"]:
        with pytest.raises(ParseError):
            parse_permutation(bad)
    with pytest.raises(DomainError):
        parse_permutation("(1 6)", 5)


def test_components():
    comps = inertia_components(5)
    assert len(comps) == 7
    c = next(c for c in comps if str(c.cycle_type) == "2+2+1")
    assert c.fixed_locus_rank == 3 and c.coarse_target_rank == 3
    assert c.group_descriptor == ((1, 1), (2, 2)) and c.centralizer_order == 8
    assert c.coarse_text() == "Sym^1 X x Sym^2 X"
    last = comps[-1]
    assert last.locus_text() == "X^5/(S5)" and last.coarse_target_rank == 5
    (one,) = inertia_components(1)
    assert one.fixed_locus_rank == 1 and one.centralizer_order == 1


@pytest.mark.parametrize("d", range(1, 9))
def test_component_count(d):
    assert len(inertia_components(d)) == len(partitions(d))


def test_gerbe_examples():
    f = gerbe_fiber(4, parse_permutation("(12)(34)(5)"))
    assert f.orbits == ((2, 2), (2, 2), (1, 4)) and f.coarse_count == 3 and not f.representable
    assert f.text() == "Bmu2 u Bmu2 u Bmu4"
    g = gerbe_fiber(1, tuple(range(1, 5)))
    assert g.orbits == ((1, 1),) * 4 and g.representable
    h = gerbe_fiber(2, parse_permutation("(12)(34)(5)"))
    assert h.orbits == ((2, 1), (2, 1), (1, 2)) and h.representable
    with pytest.raises(PreconditionError):
        gerbe_fiber(3, parse_permutation("(12)"))


@settings(max_examples=80, deadline=None)
@given(st.permutations(list(range(1, 8))), st.integers(1, 6))
def test_gerbe_invariants(perm, mult):
    sigma = tuple(perm)
    order = math.lcm(*(len(c) for c in cycles(sigma)))
    f = gerbe_fiber(order * mult, sigma)
    assert sum(length for length, _ in f.orbits) == 7
    assert all((order * mult) % length == 0 for length, _ in f.orbits)
    assert f.coarse_count == cycle_type(sigma).N
    assert f.representable == (mult == 1)
