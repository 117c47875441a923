# Homomorphism counts Hom(Gamma, S_n) through the character formula, the
# subgroup-count transform, brute-force oracles, asymptotic main terms and the
# equivalence invariants of Fuchsian, one-relator and Demuskin presentations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import sympy
from tqdm import tqdm

from src.character_engine import ENGINE
from src.partition_core import Partition, partitions_of
from src.presentations import (
    FuchsianPresentation,
    DemuskinPresentation,
    FreeProduct,
    INFINITY,
    invariants,
    reduce_presentation,
)
from src.root_numbers import multiplicity, demuskin_coeff, tau, sigma, tau_odd
from src.sym_statistics import hom_count_cyclic
from src.utils import (
    setup_logger,
    factorial,
    as_integer,
    check_ceiling,
    load_settings,
    parallel_map,
    DomainError,
    IntegrityError,
    PreconditionError,
    ResourceLimitError,
)

logger = setup_logger('SubgroupGrowth')


@dataclass
class GrowthSeries:
    """h[n] = |Hom|/n! (h[0] = 1), s[n] subgroups of index n (s[0] = 0), d[k] of (sum h_n z^n)^{-1}."""
    presentation: str
    h: list = field(default_factory=list)
    s: list = field(default_factory=list)
    d: list = field(default_factory=list)

    @property
    def n_max(self) -> int:
        return len(self.h) - 1


@dataclass(frozen=True)
class MainTermSpec:
    delta: int
    mu: Fraction
    m_gamma: int
    log_l: object  # mpmath.mpf
    phi_power: Fraction  # 3/2 - sum(1 - 1/a_i)
    phi_terms: tuple  # (exponent t/a_i, weight 1/t)


# Character formula

def _fuchsian_term(job: tuple) -> Fraction:
    # Worker: one partition's contribution prod A_i prod m_j / chi(1)^exponent
    parts, a, e, exponent = job
    lam = Partition._trusted(parts)
    numerator = 1
    for order in a:
        numerator *= ENGINE.order_dividing_sum(parts, order)
        if numerator == 0:
            return Fraction(0)
    for power in e:
        numerator *= multiplicity(lam, power)
        if numerator == 0:
            return Fraction(0)
    return Fraction(numerator) / Fraction(ENGINE.dimension(parts)) ** exponent


def hom_count_fuchsian(gamma: FuchsianPresentation, n: int, threads: int = 1, ceiling: int = None,
                       show_progress: bool = False) -> int:
    """
    |Hom(Gamma, S_n)| = n! h_n with

        h_n = (n!)^{s+2t-2} prod_i |Hom(C_{a_i}, S_n)| sum_lambda prod_i alpha^(a_i) prod_j m^(e_j) / chi(1)^{r+s+2t-2}

    Since |Hom(C_a, S_n)| alpha^(a) = sum_{pi^a=1} chi(pi), the sum runs over those integers.
    An infinite a_i sends the count through the free-product reduction.

    Raises:
        IntegrityError: the character sum does not clear to an integer
        ResourceLimitError: n above the ceiling
    """
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    ceiling = load_settings().n_ceiling if ceiling is None else ceiling
    check_ceiling(n, ceiling, 'hom_count_fuchsian')

    if gamma.has_infinite_order:
        reduced = reduce_presentation(gamma)
        logger.debug(f"{gamma.to_string()} reduces to {reduced.to_string()}")
        return free_product_hom(reduced, n)

    exponent = gamma.r + gamma.s + 2 * gamma.t - 2
    jobs = [(tuple(lam), gamma.finite_a, gamma.e, exponent) for lam in partitions_of(n, ceiling=ceiling)]
    if show_progress and threads <= 1:
        terms = [_fuchsian_term(job) for job in tqdm(jobs, desc=f"Character sum n={n}")]
    else:
        terms = parallel_map(_fuchsian_term, jobs, threads=threads, chunksize=64)

    total = sum(terms, Fraction(0))
    count = total * Fraction(factorial(n)) ** (gamma.s + 2 * gamma.t - 1)
    return as_integer(count, f"|Hom({gamma.to_string()}, S_{n})|")


def free_product_hom(product: FreeProduct, n: int) -> int:
    """prod_j |Hom(C_{a_j}, S_n)| times (n!)^rank."""
    count = factorial(n) ** product.free_rank
    for order in product.torsion:
        count *= factorial(n) if order == INFINITY else hom_count_cyclic(int(order), n)
    return count


def one_relator_hom(e, n: int, threads: int = 1, ceiling: int = None) -> int:
    """
    |Hom(<y_1..y_s | y_1^{e_1}...y_s^{e_s}>, S_n)|
        = (n!)^{s-1} sum_lambda prod_j m^(e_j)(lambda) / chi(1)^{s-2}
    """
    e = tuple(e)
    if not e:
        raise PreconditionError("one_relator_hom needs at least one exponent")
    if any(x < 2 for x in e):
        raise PreconditionError(f"exponents must be >= 2, got {e}")
    gamma = FuchsianPresentation(r=0, s=len(e), t=0, a=(), e=e, label='onerel')
    return hom_count_fuchsian(gamma, n, threads=threads, ceiling=ceiling)


def _demuskin_term(job: tuple) -> Fraction:
    parts, q, power = job
    lam = Partition._trusted(parts)
    return demuskin_coeff(lam, q) * Fraction(ENGINE.dimension(parts)) ** power


def demuskin_hom(q: int, d: int, n: int, threads: int = 1, ceiling: int = None) -> int:
    """|Hom(Gamma_{q,d}, S_n)| = (n!)^{2d-1} sum_lambda l_lambda^(q) chi(1)^{3-2d}."""
    if q < 1 or d < 2:
        raise PreconditionError(f"need q >= 1 and d >= 2, got q={q}, d={d}")
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    ceiling = load_settings().n_ceiling if ceiling is None else ceiling
    check_ceiling(n, ceiling, 'demuskin_hom')

    jobs = [(tuple(lam), q, 3 - 2 * d) for lam in partitions_of(n, ceiling=ceiling)]
    total = sum(parallel_map(_demuskin_term, jobs, threads=threads, chunksize=64), Fraction(0))
    return as_integer(total * factorial(n) ** (2 * d - 1), f"|Hom(Gamma_({q},{d}), S_{n})|")


def hom_count(presentation, n: int, threads: int = 1, ceiling: int = None, show_progress: bool = False) -> int:
    if isinstance(presentation, DemuskinPresentation):
        return demuskin_hom(presentation.q, presentation.d, n, threads=threads, ceiling=ceiling)
    return hom_count_fuchsian(presentation, n, threads=threads, ceiling=ceiling, show_progress=show_progress)


# Brute force

def _compose(p: tuple, q: tuple) -> tuple:
    return tuple(p[i] for i in q)


def _inverse(p: tuple) -> tuple:
    result = [0] * len(p)
    for i, image in enumerate(p):
        result[image] = i
    return tuple(result)


def _power(p: tuple, k: int) -> tuple:
    result = tuple(range(len(p)))
    for _ in range(k):
        result = _compose(result, p)
    return result


def _relator_blocks(presentation, elements: list) -> list:
    # Each block is the distribution of the element its generators contribute to the long relation
    identity = tuple(range(len(elements[0])))
    blocks = []

    def commutator_block():
        block = Counter()
        for u in elements:
            u_inv = _inverse(u)
            for v in elements:
                block[_compose(_compose(u, v), _compose(u_inv, _inverse(v)))] += 1
        return block

    if isinstance(presentation, DemuskinPresentation):
        # x^{q-1}[x, y] as one block over (x, y)
        first = Counter()
        for x in elements:
            lead = _power(x, presentation.q - 1)
            x_inv = _inverse(x)
            for y in elements:
                first[_compose(lead, _compose(_compose(x, y), _compose(x_inv, _inverse(y))))] += 1
        blocks.append(first)
        shared = commutator_block()
        blocks.extend([shared] * (presentation.d - 1))
        return blocks

    for order in presentation.a:
        if order == INFINITY:
            blocks.append(Counter(elements))
        else:
            blocks.append(Counter(x for x in elements if _power(x, int(order)) == identity))
    for exponent in presentation.e:
        blocks.append(Counter(_power(y, exponent) for y in elements))
    if presentation.t:
        shared = commutator_block()
        blocks.extend([shared] * presentation.t)
    return blocks


def hom_count_brute(presentation, n: int, ceiling: int = None, torsion_ceiling: int = None) -> int:
    """
    Count generator tuples satisfying every relation by direct enumeration

    The long relation is split into blocks; all but the last are convolved and
    the last is matched by lookup of the inverse.
    """
    settings = load_settings()
    ceiling = settings.brute_ceiling if ceiling is None else ceiling
    torsion_ceiling = settings.torsion_brute_ceiling if torsion_ceiling is None else torsion_ceiling
    torsion_only = isinstance(presentation, FuchsianPresentation) and presentation.s == 0 and presentation.t == 0
    limit = torsion_ceiling if torsion_only else ceiling
    if n > limit:
        raise ResourceLimitError(f"brute force limited to n <= {limit}, got n={n}")
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")

    elements = list(itertools.permutations(range(n)))
    identity = tuple(range(n))
    blocks = _relator_blocks(presentation, elements)
    if not blocks:
        return 1

    accumulated = Counter({identity: 1})
    for block in blocks[:-1]:
        product = Counter()
        for left, left_count in accumulated.items():
            for right, right_count in block.items():
                product[_compose(left, right)] += left_count * right_count
        accumulated = product

    last = blocks[-1]
    return sum(count * last.get(_inverse(element), 0) for element, count in accumulated.items())


# Transform

def subgroup_counts(h: list) -> tuple:
    """
    Index-n subgroup counts from h_n = |Hom|/n!

    Args:
        h: [h_1, h_2, ..., h_N] (h_0 = 1 is implicit)

    Returns:
        (s, d) with s = [s_1..s_N] exact integers and d = [d_0..d_N] the
        coefficients of (sum_{n>=0} h_n z^n)^{-1}

    Raises:
        IntegrityError: some s_n negative or not integral
    """
    series = [Fraction(1)] + [Fraction(value) for value in h]
    size = len(series) - 1

    s = [0] * (size + 1)
    for n in range(1, size + 1):
        value = n * series[n] - sum((series[n - k] * s[k] for k in range(1, n)), Fraction(0))
        s[n] = as_integer(value, f"s_{n}")
        if s[n] < 0:
            raise IntegrityError(f"s_{n} is negative: {s[n]}")

    d = [Fraction(1)]
    for k in range(1, size + 1):
        d.append(-sum((series[j] * d[k - j] for j in range(1, k + 1)), Fraction(0)))

    return s[1:], d


def growth_series(presentation, n_max: int, threads: int = 1, ceiling: int = None,
                  show_progress: bool = False, cached_h: list = None) -> GrowthSeries:
    """
    h_n, s_n, d_k for n = 1..n_max

    cached_h: [h_0, h_1, ...] from an earlier run; those entries are not recomputed.
    """
    cached_h = list(cached_h or [])[1:]
    h = cached_h[:n_max]
    if h:
        logger.info(f"reusing {len(h)} cached h_n for {presentation.to_string()}")
    iterator = range(len(h) + 1, n_max + 1)
    if show_progress:
        iterator = tqdm(iterator, desc=f"Growth {presentation.to_string()}")
    for n in iterator:
        h.append(Fraction(hom_count(presentation, n, threads=threads, ceiling=ceiling), factorial(n)))
    s, d = subgroup_counts(h)
    return GrowthSeries(presentation=presentation.to_string(), h=[Fraction(1)] + h, s=[0] + s, d=d)


def transform_round_trip(series: GrowthSeries) -> list:
    """s_n rebuilt as sum_k d_k (n-k) h_{n-k}; equals series.s exactly."""
    rebuilt = [0]
    for n in range(1, series.n_max + 1):
        value = sum((series.d[k] * (n - k) * series.h[n - k] for k in range(n)), Fraction(0))
        rebuilt.append(as_integer(value, f"rebuilt s_{n}"))
    return rebuilt


# Main terms

def main_term_spec(gamma: FuchsianPresentation, precision: int = 50) -> MainTermSpec:
    inv = invariants(gamma)
    if inv.alpha <= 0:
        raise DomainError(f"main term needs alpha > 0, got alpha={inv.alpha}")
    if gamma.has_infinite_order:
        raise DomainError("main term needs every a_i finite")

    with mpmath.workdps(precision + 10):
        torsion = sum((1 - Fraction(1, a) for a in gamma.finite_a), Fraction(0))
        log_l = (
            -(mpmath.mpf(1) / 2 + mpmath.mpf(torsion.numerator) / torsion.denominator) * mpmath.log(2 * mpmath.pi)
            - mpmath.log(math.prod(gamma.finite_a)) / 2
            - sum((mpmath.mpf(1) / (2 * a) for a in gamma.finite_a if a % 2 == 0), mpmath.mpf(0))
        )
    phi_terms = tuple(
        (Fraction(t, a), Fraction(1, t))
        for a in gamma.finite_a
        for t in sympy.divisors(a) if t < a
    )
    return MainTermSpec(delta=inv.delta, mu=inv.mu, m_gamma=inv.m_gamma, log_l=log_l,
                        phi_power=Fraction(3, 2) - torsion, phi_terms=phi_terms)


def _mpf(value: Fraction):
    return mpmath.mpf(value.numerator) / value.denominator


def main_term(gamma: FuchsianPresentation, n: int, precision: int = 50):
    """log(delta L (n!)^mu Phi(n)) as an mpmath number with precision digits."""
    spec = main_term_spec(gamma, precision=precision)
    with mpmath.workdps(precision + 10):
        log_value = (
            mpmath.log(spec.delta)
            + spec.log_l
            + _mpf(spec.mu) * mpmath.loggamma(n + 1)
            + _mpf(spec.phi_power) * mpmath.log(n)
            + sum((_mpf(w) * mpmath.power(n, _mpf(x)) for x, w in spec.phi_terms), mpmath.mpf(0))
        )
    return +log_value


# Printed corrections for Gamma(2,3,7); +8/21 and +11/21 are read as negative exponents
TRIANGLE_237_CORRECTIONS = (
    (Fraction(-2, 7), Fraction(-1, 6)),
    (Fraction(-1, 8), Fraction(-4, 21)),
    (Fraction(-1, 9), Fraction(-3, 14)),
    (Fraction(-113, 147), Fraction(-1, 3)),
    (Fraction(-23, 140), Fraction(-5, 14)),
    (Fraction(319, 8064), Fraction(-8, 21)),
    (Fraction(1, 72), Fraction(-17, 42)),
    (Fraction(1, 162), Fraction(-3, 7)),
    (Fraction(745, 8232), Fraction(-1, 2)),
    (Fraction(-28309, 64680), Fraction(-11, 21)),
)

TRIANGLE_237 = FuchsianPresentation(r=3, s=0, t=0, a=(2, 3, 7), e=())


def triangle_237_prediction(n: int, terms: int = 0, precision: int = 50):
    """Main term of s_n(Gamma(2,3,7)) times 1 + the first `terms` printed corrections."""
    if terms > 5:
        logger.warning("corrections beyond the fifth use exponents whose sign was corrected")
    with mpmath.workdps(precision + 10):
        factor = 1 + sum(
            (_mpf(coeff) * mpmath.power(n, _mpf(power)) for coeff, power in TRIANGLE_237_CORRECTIONS[:terms]),
            mpmath.mpf(0),
        )
        return mpmath.exp(main_term(TRIANGLE_237, n, precision=precision)) * factor


def residual_report(series: GrowthSeries, window, terms_list=(0, 1), precision: int = 50) -> dict:
    """max |s_n / prediction - 1| over the window for each number of correction terms."""
    report = {}
    for terms in terms_list:
        worst = mpmath.mpf(0)
        for n in window:
            prediction = triangle_237_prediction(n, terms=terms, precision=precision)
            worst = max(worst, abs(series.s[n] / prediction - 1))
        report[terms] = worst
    return report


def one_relator_main_term(e, n: int, precision: int = 50):
    """
    log of K (n!)^{mu - alpha/2} exp(sum_j sum_{nu | e_j, nu < e_j} n^{nu/e_j}/nu + (alpha - 2mu + 2)/4 log n)
    for one-relator groups with alpha < 0.
    """
    gamma = FuchsianPresentation(r=0, s=len(e), t=0, a=(), e=tuple(e), label='onerel')
    inv = invariants(gamma)
    if inv.alpha >= 0:
        raise DomainError(f"one-relator main term needs alpha < 0, got {inv.alpha}")
    with mpmath.workdps(precision + 10):
        mu, alpha = _mpf(inv.mu), _mpf(inv.alpha)
        log_k = (
            -sum((mpmath.mpf(1) / (2 * x) for x in e if x % 2 == 0), mpmath.mpf(0))
            - (2 + 2 * mu - alpha) / 4 * mpmath.log(2 * mpmath.pi)
            - mpmath.log(math.prod(e)) / 2
        )
        value = (
            log_k
            + (mu - alpha / 2) * mpmath.loggamma(n + 1)
            + sum((mpmath.power(n, mpmath.mpf(nu) / x) / nu for x in e for nu in sympy.divisors(x) if nu < x),
                  mpmath.mpf(0))
            + (alpha - 2 * mu + 2) / 4 * mpmath.log(n)
        )
    return +value


def one_relator_ratio(e, n: int, threads: int = 1) -> Fraction:
    """|Hom(<y | prod y_j^{e_j}>, S_n)| / |Hom(C_{e_1} * ... * C_{e_s}, S_n)|."""
    free = free_product_hom(FreeProduct(torsion=tuple(e), free_rank=0), n)
    return Fraction(one_relator_hom(e, n, threads=threads), free)


def demuskin_main_term(q: int, d: int, n: int) -> int:
    """delta n (n!)^{2d-2}, delta = 1 for q even and 2 for q odd."""
    delta = 1 if q % 2 == 0 else 2
    return delta * n * factorial(n) ** (2 * d - 2)


# s_n(Gamma_{q,2}) = delta n (n!)^2 R(n); coefficients of n^0..n^-5 by gcd(q, 30)
DEMUSKIN_R_SERIES = {
    1: (1, -1, -7, -56, -1237, -33573),
    2: (1, -1, -3, -37, -623, -19460),
    3: (1, -1, -7, -47, -1111, -32826),
    5: (1, -1, -7, -56, -1237, -32173),
    6: (1, -1, -3, -28, -497, -19541),
    10: (1, -1, -3, -37, -623, -18060),
    15: (1, -1, -7, -47, -1111, -31426),
    30: (1, -1, -3, -28, -497, -18141),
}


def demuskin_r_series(q: int, n: int, terms: int = 6) -> Fraction:
    coefficients = DEMUSKIN_R_SERIES[math.gcd(q, 30)][:terms]
    return sum((Fraction(c, n ** k) for k, c in enumerate(coefficients)), Fraction(0))


# Equivalence

def _tau_product(e) -> int:
    return math.prod(tau(x) - 1 for x in e)


def _sigma_condition(e) -> int:
    first = math.prod(sigma(x) + tau(x) ** 2 - 3 * tau(x) + tau_odd(x) for x in e)
    second = math.prod(sigma(x) + tau(x) ** 2 - 3 * tau(x) - tau_odd(x) + 2 for x in e)
    return first + second


def equivalence_invariants(gamma: FuchsianPresentation, other: FuchsianPresentation) -> dict:
    """
    Gamma ~ Delta iff the a-multisets, mu and delta agree (both with alpha > 0);
    plus the two necessary conditions for strong equivalence on the e_j.
    """
    inv_gamma, inv_other = invariants(gamma), invariants(other)
    report = {
        'gamma': gamma.to_string(),
        'delta_presentation': other.to_string(),
        'a_multiset_equal': sorted(gamma.finite_a) == sorted(other.finite_a)
                            and gamma.has_infinite_order == other.has_infinite_order,
        'mu_equal': inv_gamma.mu == inv_other.mu,
        'delta_equal': inv_gamma.delta == inv_other.delta,
        'tau_condition': (_tau_product(gamma.e), _tau_product(other.e)),
        'sigma_condition': (_sigma_condition(gamma.e), _sigma_condition(other.e)),
    }
    report['tau_condition_holds'] = report['tau_condition'][0] == report['tau_condition'][1]
    report['sigma_condition_holds'] = report['sigma_condition'][0] == report['sigma_condition'][1]

    both_in_range = inv_gamma.alpha > 0 and inv_other.alpha > 0
    report['alpha_positive'] = both_in_range
    report['equivalent'] = (
        report['a_multiset_equal'] and report['mu_equal'] and report['delta_equal']
    ) if both_in_range else None

    # One-relator groups below the growth range compare by their exponent multisets
    if gamma.is_one_relator and other.is_one_relator and inv_gamma.alpha < 0 and inv_other.alpha < 0:
        report['equivalent'] = sorted(gamma.e) == sorted(other.e)

    if report['equivalent'] is None:
        logger.warning("equivalence undecided: alpha <= 0 outside the one-relator case")
    return report


def free_product_equivalent(first: FreeProduct, second: FreeProduct) -> bool:
    """Same free rank and the same torsion multiset."""
    return first.free_rank == second.free_rank and sorted(first.torsion) == sorted(second.torsion)
