# test_partition_core.py

import math

import pytest
import sympy

from src.partition_core import (
    Partition,
    CycleType,
    partitions_of,
    cycle_types_of,
    conjugate,
    hook_grid,
    sq,
    rim_hooks,
    class_size,
    centralizer_order,
    cycle_type_of,
    parse_partition,
    parse_cycle_type,
)
from src.utils import PreconditionError, ResourceLimitError, UsageError

from oracles import all_partitions, border_strips, syt_count, all_perms, cycle_lengths


def test_partitions_of_small_cases():
    assert partitions_of(0) == [Partition(())]
    assert len(partitions_of(4)) == 5
    assert len(partitions_of(10)) == 42


def test_partitions_reverse_lex_order():
    assert [tuple(p) for p in partitions_of(4)] == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_partition_counts_match_sympy():
    for n in range(0, 36):
        assert len(partitions_of(n)) == sympy.npartitions(n)


@pytest.mark.slow
def test_partition_counts_match_sympy_to_sixty():
    for n in range(36, 61):
        assert len(partitions_of(n, ceiling=60)) == sympy.npartitions(n)


def test_partitions_match_enumeration_oracle():
    for n in range(1, 9):
        assert sorted(tuple(p) for p in partitions_of(n)) == sorted(all_partitions(n))


def test_ceiling_is_enforced():
    with pytest.raises(ResourceLimitError):
        partitions_of(12, ceiling=10)


def test_partition_validation():
    with pytest.raises(PreconditionError):
        Partition((1, 2))
    with pytest.raises(PreconditionError):
        Partition((2, -1))
    assert Partition((3, 1, 0, 0)) == Partition((3, 1))


def test_partition_fields():
    lam = Partition((4, 2, 1))
    assert lam.weight == 7
    assert lam.norm == 3
    assert lam.first_row == 4
    assert lam.delta == 3
    assert lam.without_first_row() == (2, 1)
    assert lam.to_json() == [4, 2, 1]


def test_conjugate_examples():
    assert conjugate(Partition((5,))) == (1, 1, 1, 1, 1)
    assert conjugate(Partition((3, 1))) == (2, 1, 1)


def test_conjugate_is_involution():
    for n in range(1, 13):
        for lam in partitions_of(n):
            conj = conjugate(lam)
            assert conjugate(conj) == lam
            assert conj.weight == n
            assert lam.norm == conj.first_row


def test_hook_grid_examples():
    assert hook_grid(Partition((2, 1))).values() == [3, 1, 1]
    assert hook_grid(Partition((1,))).values() == [1]
    grid = hook_grid(Partition((2, 2)))
    assert grid.square_sum(2) == 8
    assert grid.hook(1, 1) == 3


def test_hook_product_divides_factorial():
    for n in range(1, 15):
        for lam in partitions_of(n):
            assert math.factorial(n) % hook_grid(lam).product() == 0


def test_hook_formula_counts_tableaux():
    for n in range(1, 9):
        for lam in partitions_of(n):
            assert math.factorial(n) // hook_grid(lam).product() == syt_count(tuple(lam))


def test_sq_examples_and_bound():
    assert sq(Partition((6,))) == 1
    assert sq(Partition((2, 2))) == 2
    with pytest.raises(PreconditionError):
        sq(Partition(()))
    for n in range(1, 15):
        for lam in partitions_of(n):
            s = sq(lam)
            assert (s - 1) * s <= n - lam.first_row


def test_rim_hooks_examples():
    assert rim_hooks(Partition((1,)), 1) == [(Partition(()), 0)]
    assert rim_hooks(Partition((2, 2)), 4) == []
    # (3,1) has one border strip of size 2: two cells off the first row
    assert rim_hooks(Partition((3, 1)), 2) == [(Partition((1, 1)), 0)]


def test_rim_hooks_match_border_strip_oracle():
    for n in range(1, 9):
        for lam in partitions_of(n):
            for k in range(1, n + 1):
                found = sorted((tuple(rest), leg) for rest, leg in rim_hooks(lam, k))
                assert found == border_strips(tuple(lam), k)


def test_rim_hook_count_bound():
    for n in range(1, 15):
        for lam in partitions_of(n):
            for k in range(1, n + 1):
                assert len(rim_hooks(lam, k)) <= 2 * sq(lam)


def test_class_sizes():
    assert class_size(CycleType((1, 1, 1, 1))) == 1
    assert class_size(CycleType((2, 1, 1))) == 6
    for n in range(1, 15):
        classes = cycle_types_of(n)
        assert sum(class_size(c) for c in classes) == math.factorial(n)
        for c in classes:
            assert class_size(c) * centralizer_order(c) == math.factorial(n)


def test_class_sizes_match_enumeration():
    for n in range(1, 6):
        counts = {}
        for p in all_perms(n):
            counts[cycle_lengths(p)] = counts.get(cycle_lengths(p), 0) + 1
        for c in cycle_types_of(n):
            assert counts[tuple(c)] == class_size(c)


def test_cycle_type_fields():
    c = CycleType((3, 2, 1, 1))
    assert c.fixed_points == 2
    assert c.multiplicity(2) == 1
    assert c.multiplicities() == {1: 2, 2: 1, 3: 1}
    assert c.cycle_count == 4
    assert c.sign == -1
    assert c.order == 6
    assert c.to_json() == {'role': 'class', 'parts': [3, 2, 1, 1]}
    assert cycle_type_of([1, 2, 0, 4, 3, 5, 6]) == c


def test_parsing():
    assert parse_partition('3,1') == (3, 1)
    assert parse_partition('[1, 3]') == (3, 1)
    assert parse_partition('') == ()
    assert isinstance(parse_cycle_type('2,1,1'), CycleType)
    with pytest.raises(UsageError):
        parse_partition('3,x')
