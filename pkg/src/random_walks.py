# Random walks on S_n driven by a conjugacy class: exact k-step laws and l2 distances
# from character sums, combinatorial and statistical mixing times, and a seeded
# Monte Carlo sampler used for cross-checks

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from src.character_engine import ENGINE
from src.partition_core import (
    CycleType,
    as_cycle_type,
    partitions_of,
    cycle_types_of,
    class_size,
    cycle_type_of,
)
from src.utils import (
    setup_logger,
    factorial,
    falling_factorial,
    check_ceiling,
    load_settings,
    parallel_map,
    NonConvergenceError,
    PreconditionError,
)

logger = setup_logger('RandomWalks')

TARGETS = ('alternating', 'symmetric')

# Largest even k tried before giving up on the statistical criterion
MAX_WALK_LENGTH = 400

# Walks per Monte Carlo task; fixed so the output does not depend on the worker count
TRIAL_CHUNK = 1000


@dataclass(frozen=True)
class WalkSpec:
    """
    Walk on S_n whose steps are uniform elements of the class c

    target 'alternating' measures distance to the uniform law on A_n and
    drops both linear characters; 'symmetric' drops only the trivial one.
    """
    n: int
    c: CycleType
    target: str = 'alternating'

    def __post_init__(self):
        object.__setattr__(self, 'c', as_cycle_type(self.c))
        if self.c.weight != self.n:
            raise PreconditionError(f"class {self.c} is not a class of S_{self.n}")
        if self.c.is_identity:
            raise PreconditionError("the identity class does not generate a walk")
        if self.target not in TARGETS:
            raise PreconditionError(f"target must be one of {TARGETS}, got {self.target!r}")

    @property
    def odd_class(self) -> bool:
        """Odd classes alternate between the cosets of A_n."""
        return not self.c.is_even

    def excluded(self, lam) -> bool:
        parts = tuple(lam)
        if parts == (self.n,):
            return True
        return self.target == 'alternating' and parts == (1,) * self.n


@dataclass
class ClassDistribution:
    """Probability mass of x_k on each conjugacy class (not per element)."""
    n: int
    k: int
    masses: dict = field(default_factory=dict)

    def mass(self, c) -> Fraction:
        return self.masses.get(as_cycle_type(c), Fraction(0))

    def density(self, c) -> Fraction:
        """Probability of one permutation in class c."""
        c = as_cycle_type(c)
        return self.mass(c) / class_size(c)

    def total(self) -> Fraction:
        return sum(self.masses.values(), Fraction(0))

    def support(self) -> list:
        return [c for c, value in self.masses.items() if value != 0]

    def total_variation(self, other: "ClassDistribution") -> Fraction:
        keys = set(self.masses) | set(other.masses)
        return sum((abs(self.mass(c) - other.mass(c)) for c in keys), Fraction(0)) / 2


def _warn_odd(spec: WalkSpec):
    if spec.odd_class and spec.target == 'alternating':
        logger.warning(
            f"class {spec.c} is odd: the walk alternates cosets of A_{spec.n}; "
            f"criterion computed against the A_n target as defined"
        )


# Character data for the class, one (chi(c), chi(1)) pair per partition

def _character_pair(job: tuple) -> tuple:
    parts, cycles = job
    return ENGINE.value(parts, cycles), ENGINE.dimension(parts)


@lru_cache(maxsize=512)
def _class_characters(n: int, cycles: tuple, threads: int = 1) -> tuple:
    lams = partitions_of(n, ceiling=n)
    jobs = [(tuple(lam), cycles) for lam in lams]
    pairs = parallel_map(_character_pair, jobs, threads=threads, chunksize=16)
    return tuple((lam, value, degree) for lam, (value, degree) in zip(lams, pairs))


def class_characters(spec: WalkSpec, threads: int = 1) -> tuple:
    """((lambda, chi(c), chi(1)), ...) in canonical partition order."""
    return _class_characters(spec.n, tuple(spec.c), threads)


# Exact distributions

def step_distribution(spec: WalkSpec, k: int) -> ClassDistribution:
    """
    Law of x_k on classes:
        P(x_k in c') = |c'|/n! sum_lambda chi(c') chi(1) (chi(c)/chi(1))^k
    """
    if k < 0:
        raise PreconditionError(f"k must be non-negative, got {k}")
    n = spec.n
    ratios = [(lam, Fraction(value, degree) ** k, degree) for lam, value, degree in class_characters(spec)]
    masses = {}
    for target in cycle_types_of(n, ceiling=n):
        total = Fraction(0)
        for lam, ratio, degree in ratios:
            if ratio:
                total += ENGINE.value(lam, target) * degree * ratio
        masses[target] = total * class_size(target) / factorial(n)
    return ClassDistribution(n=n, k=k, masses=masses)


def l2_distance_sq(spec: WalkSpec, k: int, threads: int = 1) -> Fraction:
    """n! ||P_k - u||_2^2 = sum over non-excluded chi of |chi(c)|^{2k} / chi(1)^{2k-2}."""
    if k < 1:
        raise PreconditionError(f"k must be at least 1, got {k}")
    return sum(
        (Fraction(value ** (2 * k), degree ** (2 * k - 2))
         for lam, value, degree in class_characters(spec, threads=threads)
         if not spec.excluded(lam)),
        Fraction(0),
    )


def target_density(spec: WalkSpec, c: CycleType) -> Fraction:
    """Uniform density of the target measure at one permutation of class c."""
    if spec.target == 'symmetric':
        return Fraction(1, factorial(spec.n))
    return Fraction(2, factorial(spec.n)) if as_cycle_type(c).is_even else Fraction(0)


def l2_distance_sq_direct(spec: WalkSpec, k: int) -> Fraction:
    """Same distance summed over permutations: n! sum_c' |c'| (density - target)^2."""
    distribution = step_distribution(spec, k)
    total = Fraction(0)
    for c in distribution.masses:
        gap = distribution.density(c) - target_density(spec, c)
        total += class_size(c) * gap * gap
    return total * factorial(spec.n)


def plancherel_check(spec: WalkSpec, k: int) -> tuple:
    """
    ((1/n!) sum_g P(g)^2, sum_chi |alpha_chi|^2) for the k-step density P,
    where alpha_chi = <P, chi> = chi(1) (chi(c)/chi(1))^k / n!.
    """
    n_fact = factorial(spec.n)
    distribution = step_distribution(spec, k)
    lhs = sum(
        (class_size(c) * distribution.density(c) ** 2 for c in distribution.masses),
        Fraction(0),
    ) / n_fact
    rhs = sum(
        ((degree * Fraction(value, degree) ** k / n_fact) ** 2 for _, value, degree in class_characters(spec)),
        Fraction(0),
    )
    return lhs, rhs


def criterion_sum(spec: WalkSpec, k: int, threads: int = 1) -> Fraction:
    return l2_distance_sq(spec, k, threads=threads)


def mixing_time_statistical(spec: WalkSpec, threads: int = 1, max_k: int = MAX_WALK_LENGTH) -> int:
    """
    Least even k with sum_{chi not excluded} |chi(c)|^{2k}/chi(1)^{2k-2} <= 1/n

    Raises:
        NonConvergenceError: a non-excluded character has |chi(c)| = chi(1), or max_k reached
    """
    _warn_odd(spec)
    characters = class_characters(spec, threads=threads)
    stuck = [tuple(lam) for lam, value, degree in characters
             if not spec.excluded(lam) and abs(value) == degree]
    if stuck:
        raise NonConvergenceError(f"class {spec.c} is periodic for characters {stuck}; criterion never drops")

    bound = Fraction(1, spec.n)
    for k in range(2, max_k + 1, 2):
        if criterion_sum(spec, k, threads=threads) <= bound:
            return k
    raise NonConvergenceError(f"criterion for {spec.c} still above 1/{spec.n} at k={max_k}")


# Combinatorial mixing time

@lru_cache(maxsize=4096)
def _fixed_point_prob(n: int, s1: int, k: int) -> Fraction:
    return sum(
        (Fraction((-1) ** (l + 1) * math.comb(n, l)) * Fraction(falling_factorial(s1, l), falling_factorial(n, l)) ** k
         for l in range(1, s1 + 1)),
        Fraction(0),
    )


def common_fixed_point_prob(c, k: int) -> Fraction:
    """P(k independent uniform elements of c share a fixed point), by inclusion-exclusion."""
    if k < 1:
        raise PreconditionError(f"k must be at least 1, got {k}")
    c = as_cycle_type(c)
    return _fixed_point_prob(c.weight, c.fixed_points, k)


def fixed_point_moments(c, k: int) -> dict:
    """
    xi_k = number of common fixed points of k class elements:
    E xi, E xi^2 and the bounds 1 - E xi <= P(xi = 0) <= 1 - E xi + (E xi)^2/2
    """
    c = as_cycle_type(c)
    n, s1 = c.weight, c.fixed_points
    mean = n * Fraction(s1, n) ** k
    second = mean + n * (n - 1) * Fraction(s1 * (s1 - 1), n * (n - 1)) ** k if n > 1 else mean
    none_shared = 1 - common_fixed_point_prob(c, k)
    lower, upper = 1 - mean, 1 - mean + mean * mean / 2
    return {
        'k': k,
        'prob_shared': 1 - none_shared,
        'mean': mean,
        'second_moment': second,
        'lower': lower,
        'upper': upper,
        'bounds_hold': lower <= none_shared <= upper,
    }


@lru_cache(maxsize=4096)
def _combinatorial_time(n: int, s1: int) -> int:
    if s1 == 0:
        return 2
    bound = Fraction(1, n)
    k = 2
    while _fixed_point_prob(n, s1, k) > bound:
        k += 2
    return k


def mixing_time_combinatorial(c) -> int:
    """Least even k with common_fixed_point_prob(c, k) <= 1/n; 2 for fixed-point-free c."""
    c = as_cycle_type(c)
    if c.is_identity:
        raise PreconditionError("t_c is undefined for the identity class")
    return _combinatorial_time(c.weight, c.fixed_points)


def _least_even(ratio: Fraction, bound: Fraction) -> int:
    k = 2
    while ratio ** k > bound:
        k += 2
    return k


def combinatorial_bracket(c) -> dict:
    """
    min{k even: (s1/n)^k <= 1/(n(n-1))} <= t_c <= min{k even: (s1/n)^k <= 1/n^2},
    next to the logarithmic estimate 2 log n / log(n/s1).
    """
    c = as_cycle_type(c)
    n, s1 = c.weight, c.fixed_points
    t_c = mixing_time_combinatorial(c)
    ratio = Fraction(s1, n)
    lower = _least_even(ratio, Fraction(1, n * (n - 1)))
    upper = _least_even(ratio, Fraction(1, n * n))
    estimate = 2 * mpmath.log(n) / mpmath.log(mpmath.mpf(n) / s1) if s1 else None
    return {
        'class': c,
        't_c': t_c,
        'lower': lower,
        'upper': upper,
        'bracket_holds': lower <= t_c <= upper,
        'estimate': estimate,
        'estimate_gap': abs(t_c - estimate) if estimate is not None else None,
    }


# Monte Carlo

def representative(c: CycleType) -> np.ndarray:
    """One permutation of class c in one-line notation: consecutive cycles."""
    perm = np.arange(c.weight)
    start = 0
    for length in c:
        block = np.arange(start, start + length)
        perm[block] = np.roll(block, -1)
        start += length
    return perm


def _walk_chunk(job: tuple) -> Counter:
    # Worker: one walk per child seed
    rep, k, seeds = job
    n = len(rep)
    counts = Counter()
    for seed in seeds:
        rng = np.random.default_rng(seed)
        # Start at the identity
        position = np.arange(n)
        for _ in range(k):
            # Uniform conjugator
            sigma = rng.permutation(n)
            # step = sigma rep sigma^-1, a uniform element of the class
            step = np.empty(n, dtype=np.int64)
            step[sigma] = sigma[rep]
            # Multiply on the left
            position = step[position]
        # Only the cycle type of the endpoint is kept
        counts[tuple(cycle_type_of(position.tolist()))] += 1
    return counts


def sample_walk(spec: WalkSpec, k: int, trials: int, seed: int = None, threads: int = 1) -> ClassDistribution:
    """
    Empirical class masses from independent k-step walks

    Each trial gets its own stream spawned from SeedSequence(seed), so results
    depend only on (seed, trials) and not on the worker count.
    """
    if trials < 1:
        raise PreconditionError(f"trials must be at least 1, got {trials}")
    if k < 0:
        raise PreconditionError(f"k must be non-negative, got {k}")
    seed = load_settings().seed if seed is None else seed

    # One child stream per trial, in trial order
    children = np.random.SeedSequence(seed).spawn(trials)
    rep = representative(spec.c)
    # Fixed-size chunks of consecutive trials
    jobs = [(rep, k, children[i:i + TRIAL_CHUNK]) for i in range(0, trials, TRIAL_CHUNK)]

    counts = Counter()
    # Chunk counts are merged; the sum does not depend on the order
    for chunk in parallel_map(_walk_chunk, jobs, threads=threads):
        counts.update(chunk)

    # Exact empirical masses in canonical class order
    masses = {
        CycleType._trusted(cycles): Fraction(count, trials)
        for cycles, count in sorted(counts.items(), reverse=True)
    }
    logger.debug(f"sampled {trials} walks of length {k} on {spec.c} with seed {seed}")
    return ClassDistribution(n=spec.n, k=k, masses=masses)


# Convolution inequality and reports

def linf_l2_check(spec: WalkSpec, k: int) -> dict:
    """
    ||f*f - u||_inf <= ||f - u||_2^2 for the k-step density f, exactly.
    u is the A_n uniform law when f lives on A_n and the target asks for it, else the S_n one.
    """
    single = step_distribution(spec, k)
    double = step_distribution(spec, 2 * k)
    on_alternating = all(c.is_even for c in single.support())
    reference = WalkSpec(spec.n, spec.c, 'alternating' if spec.target == 'alternating' and on_alternating
                         else 'symmetric')

    sup = max(abs(double.density(c) - target_density(reference, c)) for c in double.masses)
    l2 = sum(
        (class_size(c) * (single.density(c) - target_density(reference, c)) ** 2 for c in single.masses),
        Fraction(0),
    )
    return {'class': spec.c, 'k': k, 'linf': sup, 'l2_sq': l2, 'holds': sup <= l2}


def roichman_report(n: int, target: str = 'alternating', ceiling: int = None, threads: int = 1) -> dict:
    """
    t_c and t_s for every non-identity class of S_n

    The ordering t_c <= t_s <= 10 t_c is only reported; the convolution
    inequality and the monotone criterion sums are checked exactly.
    """
    ceiling = load_settings().n_ceiling if ceiling is None else ceiling
    if n < 3:
        raise PreconditionError(f"roichman_report needs n >= 3, got {n}")
    check_ceiling(n, ceiling, 'roichman_report')

    rows = []
    summary = {'classes': 0, 'tc_le_ts': 0, 'within_ten': 0, 'periodic': 0,
               'monotone': 0, 'linf_holds': 0, 'max_ratio': None}

    for c in cycle_types_of(n, ceiling=ceiling):
        if c.is_identity:
            continue
        spec = WalkSpec(n, c, target)
        summary['classes'] += 1
        t_c = mixing_time_combinatorial(c)
        try:
            t_s = mixing_time_statistical(spec, threads=threads)
        except NonConvergenceError as exc:
            logger.debug(str(exc))
            t_s = None
            summary['periodic'] += 1

        row = {'class': c, 't_c': t_c, 't_s': t_s, 'odd_class': spec.odd_class}
        if t_s is not None:
            ratio = Fraction(t_s, t_c)
            row['ratio'] = ratio
            row['ordered'] = t_c <= t_s <= 10 * t_c
            summary['tc_le_ts'] += t_c <= t_s
            summary['within_ten'] += row['ordered']
            if summary['max_ratio'] is None or ratio > summary['max_ratio']:
                summary['max_ratio'] = ratio

            sums = [criterion_sum(spec, k, threads=threads) for k in range(2, t_s + 1, 2)]
            row['monotone'] = all(a >= b for a, b in zip(sums, sums[1:]))
            summary['monotone'] += row['monotone']

        check = linf_l2_check(spec, 2)
        row['linf_holds'] = check['holds']
        summary['linf_holds'] += check['holds']
        rows.append(row)

    if summary['linf_holds'] != summary['classes']:
        logger.error(f"n={n}: convolution inequality failed for some class")
    logger.info(
        f"n={n}: {summary['classes']} classes, t_c <= t_s for {summary['tc_le_ts']}, "
        f"max t_s/t_c = {summary['max_ratio']}"
    )
    return {'n': n, 'target': target, 'rows': rows, 'summary': summary}
