import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kstab.equivariant import (
    MatrixGroup,
    VirtualCharacter,
    brute_invariant_multiplicity,
    char_coefficients,
    class_sizes,
    molien_series,
    named_group,
    parse_rational_function,
    s3_standard,
    series_compare,
    series_expand,
    sign_group,
    sk_invariant_multiplicity,
    symmetric_power_traces,
    trivial_group,
)
from kstab.errors import DomainError, EnumerationLimitError, GroupClosureError, ParseError
from kstab.inertia import partitions

TARGET = "1/((1-q^2)(1-q^3))"


def test_s3_series():
    G = s3_standard()
    assert G.order == 6
    assert molien_series(G, 10) == [1, 0, 1, 1, 1, 1, 2, 1, 2, 2, 2]
    assert series_compare(molien_series(G, 20), TARGET, 20)


def test_trivial_and_sign():
    assert molien_series(trivial_group(), 6) == list(range(1, 8))
    assert molien_series(sign_group(), 6) == [1, 0, 3, 0, 5, 0, 7]


def test_series_compare_examples():
    assert not series_compare(molien_series(s3_standard(), 5), "1/(1-q)^2", 5)
    assert series_expand([1], [1, -1], 5) == [1] * 6
    assert series_compare([1] * 8, "1/(1-q)", 7)
    with pytest.raises(ZeroDivisionError):
        series_expand([1], [0, 1], 3)


def test_rational_function_parsing():
    assert parse_rational_function("1/(1-q)") == ([1], [1, -1])
    num, den = parse_rational_function(TARGET)
    assert num == [1] and den == [1, 0, -1, -1, 0, 1]
    with pytest.raises(ParseError):
        parse_rational_function("1/(1-z)")


def test_closure_errors():
    with pytest.raises(GroupClosureError):
        MatrixGroup((((1, 0), (0, 1)), ((0, 1), (1, 1))))
    with pytest.raises(GroupClosureError):
        MatrixGroup((((-1, 0), (0, -1)),))
    with pytest.raises(GroupClosureError):
        MatrixGroup.generated_by([[[1, 1], [0, 1]]], limit=50)
    with pytest.raises(DomainError):
        named_group("d4")


def test_characteristic_coefficients():
    # det(1 - q g) for a reflection is (1 - q)(1 + q)
    assert char_coefficients(((Fraction(-1), Fraction(1)), (Fraction(0), Fraction(1)))) == [1, 0, -1]


def test_traces_against_brute_monomials():
    # diagonal matrices: trace on Sym^d is the complete homogeneous polynomial
    a, b = Fraction(2), Fraction(-3)
    diag = ((a, Fraction(0)), (Fraction(0), b))
    h = [sum(a**i * b ** (d - i) for i in range(d + 1)) for d in range(6)]
    assert symmetric_power_traces(diag, 5) == h


def test_molien_integrality():
    for G in (s3_standard(), trivial_group(3), sign_group(3)):
        assert all(c.denominator == 1 and c >= 0 for c in molien_series(G, 12))


def test_known_molien_facts():
    c = molien_series(s3_standard(), 3)
    assert c[1] == 0 and c[2] == c[3] == 1


def chi(k, mapping):
    return VirtualCharacter.from_mapping(k, mapping)


def test_multiplicity_examples():
    assert sk_invariant_multiplicity(chi(3, {(1, 1, 1): 6})) == 1
    assert sk_invariant_multiplicity(chi(3, {p.parts: 1 for p in partitions(3)})) == 1
    assert sk_invariant_multiplicity(chi(3, {(1, 1, 1): 2, (2, 1): 0, (3,): -1})) == 0
    with pytest.raises(EnumerationLimitError):
        sk_invariant_multiplicity(chi(9, {(1,) * 9: 1}))


def test_class_sizes_sum():
    for k in range(1, 8):
        assert sum(class_sizes(k).values()) == math.factorial(k)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.data())
def test_multiplicity_vs_brute_and_linear(k, data):
    classes = [p.parts for p in partitions(k)]
    vals = st.fractions(min_value=-5, max_value=5, max_denominator=4)
    a = chi(k, {c: data.draw(vals) for c in classes})
    b = chi(k, {c: data.draw(vals) for c in classes})
    assert sk_invariant_multiplicity(a) == brute_invariant_multiplicity(a)
    assert sk_invariant_multiplicity(a + b.scale(3)) == sk_invariant_multiplicity(a) + 3 * sk_invariant_multiplicity(b)


def test_permutation_character_counts_orbits():
    # the permutation character of S_k on [k] has one invariant
    for k in range(1, 6):
        values = {p.parts: p.count(1) for p in partitions(k)}
        assert sk_invariant_multiplicity(chi(k, values)) == 1
