# test_character_engine.py

import math
from fractions import Fraction

import pytest
import sympy

from src.character_engine import (
    CharacterTableSlice,
    dimension,
    character_value,
    skew_character_value,
    order_dividing_sum,
    character_table,
    q_regular_classes,
    character_polynomial,
    audit_character_bounds,
)
from src.partition_core import Partition, CycleType, partitions_of, cycle_types_of, class_size, conjugate
from src.utils import SizeMismatchError

from oracles import syt_count, all_perms, cycle_lengths, power


def test_dimension_examples():
    assert dimension(Partition((7,))) == 1
    assert dimension(Partition((2, 1))) == 2
    assert sum(dimension(lam) ** 2 for lam in partitions_of(4)) == 24


def test_dimension_matches_tableaux_count():
    for n in range(1, 9):
        for lam in partitions_of(n):
            assert dimension(lam) == syt_count(tuple(lam))


def test_degree_squares_sum_to_factorial():
    for n in range(1, 15):
        assert sum(dimension(lam) ** 2 for lam in partitions_of(n)) == math.factorial(n)


def test_character_value_examples():
    assert character_value(Partition((3, 1)), CycleType((2, 1, 1))) == 1
    assert character_value(Partition((2, 1)), CycleType((3,))) == -1


def test_value_at_identity_is_dimension():
    for n in range(1, 13):
        identity = CycleType((1,) * n)
        for lam in partitions_of(n):
            assert character_value(lam, identity) == dimension(lam)


def test_size_mismatch():
    with pytest.raises(SizeMismatchError):
        character_value(Partition((2, 1)), CycleType((2, 2)))


def test_orthogonality():
    for n in range(1, 11):
        lams = partitions_of(n)
        classes = cycle_types_of(n)
        table = {(lam, c): character_value(lam, c) for lam in lams for c in classes}
        for i, lam in enumerate(lams):
            for mu in lams[i:]:
                total = sum(class_size(c) * table[lam, c] * table[mu, c] for c in classes)
                assert total == (math.factorial(n) if lam == mu else 0)
        for a, c in enumerate(classes):
            for d in classes[a:]:
                total = sum(table[lam, c] * table[lam, d] for lam in lams)
                assert total == (math.factorial(n) // class_size(c) if c == d else 0)


def test_conjugate_partition_symmetry():
    for n in range(1, 11):
        for lam in partitions_of(n):
            for c in cycle_types_of(n):
                assert character_value(conjugate(lam), c) == c.sign * character_value(lam, c)


def test_cache_is_transparent():
    cached, uncached = CharacterTableSlice(), CharacterTableSlice(use_cache=False)
    for n in range(1, 9):
        for lam in partitions_of(n):
            for c in cycle_types_of(n):
                assert cached.value(lam, c) == uncached.value(lam, c)
    assert cached.cache_size() > 0
    assert uncached.cache_size() == 0


def test_standard_character_counts_fixed_points():
    for n in range(2, 9):
        lam = Partition((n - 1, 1))
        for c in cycle_types_of(n):
            assert character_value(lam, c) == c.fixed_points - 1


def test_skew_value_with_empty_inner_is_ordinary(engine):
    for lam in partitions_of(6):
        for c in cycle_types_of(6):
            assert engine.skew_value(lam, (), c) == engine.value(lam, c)


def test_skew_values_small():
    # (2,1)/(1) is two disconnected cells: values 2 on (1,1) and 0 on (2)
    assert skew_character_value(Partition((2, 1)), Partition((1,)), CycleType((1, 1))) == 2
    assert skew_character_value(Partition((2, 1)), Partition((1,)), CycleType((2,))) == 0
    assert skew_character_value(Partition((2, 1)), Partition((3,)), CycleType(())) == 0


def test_order_dividing_sum_matches_enumeration(engine):
    for n in range(1, 7):
        elements = all_perms(n)
        identity = tuple(range(n))
        for q in (2, 3, 4, 6):
            roots = [cycle_lengths(p) for p in elements if power(p, q) == identity]
            for lam in partitions_of(n):
                expected = sum(engine.value(lam, CycleType(shape)) for shape in roots)
                assert order_dividing_sum(lam, q) == expected


def test_character_table_rows_and_q_regular():
    rows = character_table(3)
    assert len(rows) == 9
    assert rows[0] == (Partition((3,)), CycleType((3,)), 1)
    assert [tuple(c) for c in q_regular_classes(4, 2)] == [(2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_character_polynomial_examples():
    s = sympy.symbols('s1:3')
    one = character_polynomial(Partition((1,)))
    assert sympy.expand(one.expr - (s[0] - 1)) == 0
    two = character_polynomial(Partition((2,)))
    assert sympy.expand(two.expr - (s[0] ** 2 / 2 - sympy.Rational(3, 2) * s[0] + s[1])) == 0
    assert two.threshold == 6


def test_character_polynomial_matches_values():
    for size in range(1, 5):
        for mu in partitions_of(size):
            polynomial = character_polynomial(mu)
            assert polynomial.weighted_degree() <= size
            for n in range(polynomial.threshold, 13):
                lam = Partition((n - size,) + tuple(mu))
                for c in cycle_types_of(n):
                    assert polynomial.evaluate(c) == Fraction(character_value(lam, c))


def test_audit_character_bounds_assertable_checks_hold():
    report = audit_character_bounds(10)
    assert report['pairs'] == 42 * 42
    assert report['checks']['squarevalue']['fails'] == 0
    assert report['checks']['squarevalue']['assertable']
    assert report['checks']['chi1lower_ii']['fails'] == 0
    assert not report['checks']['mixing_exponent']['assertable']
    assert not report['checks']['chi1lower_i']['assertable']


@pytest.mark.parametrize('n', range(2, 11))
def test_proviso_free_bounds_are_asserted_and_hold(n):
    report = audit_character_bounds(n)
    for name in ('squaredegree', 'large_l1_fixed_points', 'large_l1_cycles'):
        assert report['checks'][name]['assertable']
        assert report['checks'][name]['fails'] == 0
    lams = len(partitions_of(n))
    assert report['checks']['squaredegree']['holds'] == lams
    assert report['checks']['large_l1_cycles']['holds'] == lams * lams


@pytest.mark.slow
def test_audit_character_bounds_twelve():
    report = audit_character_bounds(12)
    for name in ('chi1lower_ii', 'squarevalue', 'squaredegree', 'large_l1_fixed_points', 'large_l1_cycles'):
        assert report['checks'][name]['assertable']
        assert report['checks'][name]['fails'] == 0
