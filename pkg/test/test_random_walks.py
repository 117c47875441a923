# test_random_walks.py

import math
from fractions import Fraction

import pytest

from src.partition_core import CycleType, cycle_types_of, class_size
from src.random_walks import (
    WalkSpec,
    ClassDistribution,
    step_distribution,
    l2_distance_sq,
    l2_distance_sq_direct,
    plancherel_check,
    criterion_sum,
    mixing_time_statistical,
    common_fixed_point_prob,
    fixed_point_moments,
    mixing_time_combinatorial,
    combinatorial_bracket,
    representative,
    sample_walk,
    linf_l2_check,
    roichman_report,
)
from src.utils import NonConvergenceError, PreconditionError

from oracles import convolution_distribution, common_fixed_point_brute, l2_distance_brute, cycle_lengths


def non_identity_classes(n):
    return [c for c in cycle_types_of(n) if not c.is_identity]


def test_walk_spec_validation():
    with pytest.raises(PreconditionError):
        WalkSpec(4, CycleType((1, 1, 1, 1)))
    with pytest.raises(PreconditionError):
        WalkSpec(4, CycleType((3,)))
    with pytest.raises(PreconditionError):
        WalkSpec(3, CycleType((3,)), target='cyclic')
    spec = WalkSpec(4, (2, 1, 1))
    assert spec.odd_class
    assert spec.excluded((4,)) and spec.excluded((1, 1, 1, 1))
    assert not WalkSpec(4, (2, 1, 1), 'symmetric').excluded((1, 1, 1, 1))


def test_one_step_is_uniform_on_the_class():
    for n in range(2, 8):
        for c in non_identity_classes(n):
            distribution = step_distribution(WalkSpec(n, c), 1)
            assert distribution.support() == [c]
            assert distribution.mass(c) == 1
            assert distribution.density(c) == Fraction(1, class_size(c))


def test_zero_steps_sit_at_the_identity():
    distribution = step_distribution(WalkSpec(4, (3, 1)), 0)
    assert distribution.mass((1, 1, 1, 1)) == 1


def test_step_distribution_matches_convolution():
    for n in range(2, 6):
        for c in non_identity_classes(n):
            for k in (2, 3):
                exact = step_distribution(WalkSpec(n, c), k)
                brute = convolution_distribution(n, tuple(c), k)
                assert {tuple(key): value for key, value in exact.masses.items() if value} == brute


@pytest.mark.slow
def test_step_distribution_matches_convolution_six():
    for c in non_identity_classes(6):
        exact = step_distribution(WalkSpec(6, c), 2)
        brute = convolution_distribution(6, tuple(c), 2)
        assert {tuple(key): value for key, value in exact.masses.items() if value} == brute


def test_masses_sum_to_one_and_stay_in_an():
    for n in range(2, 9):
        for c in non_identity_classes(n):
            for k in (2, 4):
                distribution = step_distribution(WalkSpec(n, c), k)
                assert distribution.total() == 1
                assert all(value >= 0 for value in distribution.masses.values())
                if c.is_even or k % 2 == 0:
                    assert all(key.is_even for key in distribution.support())


def test_l2_examples():
    three_cycles = WalkSpec(3, (3,))
    assert l2_distance_sq(three_cycles, 1) == 1
    assert criterion_sum(three_cycles, 2) == Fraction(1, 4)
    assert mixing_time_statistical(three_cycles) == 2
    with pytest.raises(PreconditionError):
        l2_distance_sq(three_cycles, 0)


def test_l2_transpositions_match_brute_force():
    for target in ('alternating', 'symmetric'):
        spec = WalkSpec(4, (2, 1, 1), target)
        assert l2_distance_sq(spec, 2) == l2_distance_brute(4, (2, 1, 1), 2, alternating=target == 'alternating')


def test_l2_routes_agree():
    for n in range(3, 9):
        for c in non_identity_classes(n):
            for k in (1, 2, 3):
                symmetric = WalkSpec(n, c, 'symmetric')
                assert l2_distance_sq(symmetric, k) == l2_distance_sq_direct(symmetric, k)
                if c.is_even or k % 2 == 0:
                    alternating = WalkSpec(n, c)
                    assert l2_distance_sq(alternating, k) == l2_distance_sq_direct(alternating, k)


def test_plancherel():
    for n in range(2, 7):
        for c in non_identity_classes(n):
            for k in (1, 2, 3):
                lhs, rhs = plancherel_check(WalkSpec(n, c), k)
                assert lhs == rhs


def test_criterion_sum_is_monotone():
    for n in range(3, 11):
        for c in non_identity_classes(n):
            spec = WalkSpec(n, c)
            sums = [criterion_sum(spec, k) for k in range(2, 13, 2)]
            assert all(a >= b for a, b in zip(sums, sums[1:]))


def test_criterion_strictly_decreasing_for_aperiodic_walks():
    for n in range(5, 9):
        for c in non_identity_classes(n):
            spec = WalkSpec(n, c)
            values = [l2_distance_sq(spec, k) for k in range(2, 9, 2)]
            if values[0]:
                assert all(a > b for a, b in zip(values, values[1:]))


def test_statistical_time_transpositions():
    spec = WalkSpec(4, (2, 1, 1))
    t_s = mixing_time_statistical(spec)
    assert t_s % 2 == 0
    assert l2_distance_sq(spec, t_s) <= Fraction(1, 4)
    assert t_s == 2 or l2_distance_sq(spec, t_s - 2) > Fraction(1, 4)
    assert l2_distance_sq(spec, t_s) == l2_distance_brute(4, (2, 1, 1), t_s, alternating=True)


def test_periodic_walk_does_not_converge():
    with pytest.raises(NonConvergenceError):
        mixing_time_statistical(WalkSpec(4, (2, 1, 1), 'symmetric'))


def test_common_fixed_point_examples():
    transpositions = CycleType((2, 1, 1))
    assert common_fixed_point_prob(transpositions, 2) == Fraction(5, 6)
    assert common_fixed_point_prob(transpositions, 4) == Fraction(53, 216)
    assert common_fixed_point_prob(transpositions, 1) == 1
    for k in range(1, 6):
        assert common_fixed_point_prob(CycleType((2, 2)), k) == 0
    with pytest.raises(PreconditionError):
        common_fixed_point_prob(transpositions, 0)


def test_common_fixed_point_matches_brute_force():
    for n in range(2, 6):
        for c in cycle_types_of(n):
            for k in (1, 2, 3):
                assert common_fixed_point_prob(c, k) == common_fixed_point_brute(n, tuple(c), k)


def test_fixed_point_moments():
    moments = fixed_point_moments((2, 1, 1), 2)
    assert moments['mean'] == 1
    assert moments['prob_shared'] == Fraction(5, 6)
    # E xi^2 = E xi + n(n-1) (s1(s1-1)/(n(n-1)))^k
    assert moments['second_moment'] == 1 + 12 * Fraction(2, 12) ** 2
    for n in range(3, 12):
        for fixed in range(1, n - 1):
            c = CycleType((n - fixed,) + (1,) * fixed)
            for k in range(1, 8):
                assert fixed_point_moments(c, k)['bounds_hold']


def test_combinatorial_time_examples():
    assert mixing_time_combinatorial((2, 1, 1)) == 4
    assert mixing_time_combinatorial((2, 2)) == 2
    assert mixing_time_combinatorial((5, 3)) == 2
    with pytest.raises(PreconditionError):
        mixing_time_combinatorial((1, 1, 1))


def test_combinatorial_bracket_and_estimate():
    for n in range(3, 21):
        for fixed in range(1, n - 1):
            report = combinatorial_bracket(CycleType((n - fixed,) + (1,) * fixed))
            assert report['bracket_holds']
            assert report['estimate_gap'] <= 3
    assert combinatorial_bracket((3,))['estimate'] is None


@pytest.mark.slow
def test_combinatorial_estimate_to_forty():
    for n in range(21, 41):
        for fixed in range(1, n - 1):
            report = combinatorial_bracket(CycleType((n - fixed,) + (1,) * fixed))
            assert report['bracket_holds'] and report['estimate_gap'] <= 3


def test_representative_has_the_class_type():
    for c in cycle_types_of(7):
        assert cycle_lengths(tuple(representative(c).tolist())) == tuple(c)


def test_sample_walk_one_step_stays_on_class():
    spec = WalkSpec(6, (3, 2, 1))
    empirical = sample_walk(spec, 1, 300, seed=5)
    assert empirical.support() == [CycleType((3, 2, 1))]
    assert empirical.total() == 1


def test_sample_walk_is_deterministic():
    spec = WalkSpec(5, (3, 1, 1))
    first = sample_walk(spec, 3, 2500, seed=11)
    second = sample_walk(spec, 3, 2500, seed=11, threads=2)
    assert first.masses == second.masses
    assert sample_walk(spec, 3, 2500, seed=12).masses != first.masses


def test_sample_walk_two_transpositions_support():
    spec = WalkSpec(4, (2, 1, 1), 'symmetric')
    empirical = sample_walk(spec, 2, 1200, seed=3)
    assert all(c.is_even for c in empirical.support())
    assert set(empirical.support()) <= set(step_distribution(spec, 2).support())


def test_sample_walk_tracks_exact_law():
    spec = WalkSpec(5, (5,))
    exact = step_distribution(spec, 4)
    empirical = sample_walk(spec, 4, 10000, seed=2024)
    assert empirical.total_variation(exact) < 0.05


def test_linf_bounded_by_l2():
    for n in range(3, 7):
        for c in non_identity_classes(n):
            for target in ('alternating', 'symmetric'):
                for k in (1, 2, 3):
                    assert linf_l2_check(WalkSpec(n, c, target), k)['holds']


def test_roichman_report_three():
    report = roichman_report(3)
    assert report['summary']['classes'] == 2
    rows = {tuple(row['class']): row for row in report['rows']}
    assert rows[(3,)]['t_c'] == 2 and rows[(3,)]['t_s'] == 2
    assert rows[(2, 1)]['t_c'] == 2 and rows[(2, 1)]['t_s'] == 2
    assert rows[(2, 1)]['odd_class']
    assert report['summary']['linf_holds'] == 2
    with pytest.raises(PreconditionError):
        roichman_report(2)


def test_roichman_report_symmetric_target_flags_periodic_classes():
    report = roichman_report(4, target='symmetric')
    periodic = [row for row in report['rows'] if row['t_s'] is None]
    assert all(row['t_s'] is None for row in report['rows'] if row['odd_class'])
    # (2,2) sits in the kernel of the (2,2) character of S_4
    assert any(tuple(row['class']) == (2, 2) for row in periodic)
    assert report['summary']['periodic'] == len(periodic)


def test_class_distribution_total_variation():
    first = ClassDistribution(3, 1, {CycleType((3,)): Fraction(1)})
    second = ClassDistribution(3, 1, {CycleType((3,)): Fraction(1, 2), CycleType((1, 1, 1)): Fraction(1, 2)})
    assert first.total_variation(second) == Fraction(1, 2)
    assert math.isclose(float(first.total_variation(first)), 0.0)
