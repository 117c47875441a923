# Root-number functions r_q, power maps on cycle types, the multiplicities
# m_chi^(q) = <r_q, chi>, the alpha_chi^(q) coefficients and the Demuskin l_chi^(q)

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import sympy

from src.character_engine import ENGINE, CharacterTableSlice
from src.partition_core import (
    Partition,
    CycleType,
    as_cycle_type,
    partitions_of,
    cycle_types_of,
    class_size,
    conjugate,
)
from src.sym_statistics import hom_count_cyclic, q_poly
from src.utils import (
    setup_logger,
    factorial,
    as_integer,
    IntegrityError,
    NonConvergenceError,
    PreconditionError,
    load_settings,
)

logger = setup_logger('RootNumbers')


@dataclass(frozen=True)
class PowerMap:
    source: CycleType
    exponent: int
    image: CycleType


@dataclass(frozen=True)
class MultiplicityRecord:
    partition: Partition
    q: int
    m: int
    l: Fraction = None
    alpha: Fraction = None


# Divisor functions

def tau(q: int) -> int:
    return int(sympy.divisor_count(q))


def sigma(q: int) -> int:
    return int(sympy.divisor_sigma(q))


def tau_odd(q: int) -> int:
    return sum(1 for t in sympy.divisors(q) if t % 2)


# Power maps

def power_cycle_type(c: CycleType, q: int) -> CycleType:
    """A kappa-cycle raised to the q-th power splits into gcd(kappa, q) cycles of length kappa/gcd."""
    if q < 1:
        raise PreconditionError(f"q must be positive, got {q}")
    parts = []
    for kappa in c:
        g = math.gcd(kappa, q)
        parts.extend([kappa // g] * g)
    return CycleType._trusted(tuple(sorted(parts, reverse=True)))


def power_map(c: CycleType, q: int) -> PowerMap:
    c = as_cycle_type(c)
    return PowerMap(source=c, exponent=q, image=power_cycle_type(c, q))


@lru_cache(maxsize=256)
def _power_fibres(n: int, q: int) -> dict:
    # image class -> total size of the classes that power onto it
    fibres = {}
    for c in cycle_types_of(n, ceiling=n):
        image = tuple(power_cycle_type(c, q))
        fibres[image] = fibres.get(image, 0) + class_size(c)
    return fibres


def root_count(c: CycleType, q: int) -> int:
    """r_q(pi) for pi in c: number of sigma with sigma^q = pi."""
    if q < 1:
        raise PreconditionError(f"q must be positive, got {q}")
    c = as_cycle_type(c)
    preimage_mass = _power_fibres(c.weight, q).get(tuple(c), 0)
    return as_integer(Fraction(preimage_mass, class_size(c)), f"r_{q} on class {c}")


# Multiplicities

def multiplicity(lam: Partition, q: int, engine: CharacterTableSlice = None) -> int:
    """
    m_chi^(q) = (1/n!) sum_c |c| chi_lambda(c^q)

    Raises:
        IntegrityError: value negative or not an integer
    """
    if q < 1:
        raise PreconditionError(f"q must be positive, got {q}")
    engine = engine or ENGINE
    n = sum(lam)
    total = sum(
        class_size(c) * engine.value(lam, power_cycle_type(c, q))
        for c in cycle_types_of(n, ceiling=n)
    )
    value = as_integer(Fraction(total, factorial(n)), f"m^({q}) of {lam}")
    if value < 0:
        raise IntegrityError(f"m^({q}) of {lam} is negative: {value}")
    return value


def closed_form_constant(mu: Partition, q: int):
    """C_mu^q for mu = (1), (2), (1,1); None for any other mu."""
    mu = tuple(mu)
    t, s, odd = tau(q), sigma(q), tau_odd(q)
    if mu == (1,):
        return t - 1
    if mu == (2,):
        return as_integer(Fraction(s + t * t - 3 * t + odd, 2), 'C_(2)')
    if mu == (1, 1):
        return as_integer(Fraction(s + t * t - 3 * t - odd, 2), 'C_(1,1)') + 1
    return None


def first_row_shape(mu: Partition, n: int) -> Partition:
    """(n - |mu|, mu), which needs n - |mu| >= mu_1."""
    mu = tuple(mu)
    top = n - sum(mu)
    if mu and top < mu[0]:
        raise PreconditionError(f"(n-|mu|, mu) is not a partition for n={n}, mu={mu}")
    return Partition((top,) + mu)


def stabilized_constant(mu: Partition, q: int, max_n: int = 30, max_size: int = 6,
                        engine: CharacterTableSlice = None) -> int:
    """
    C_mu^q: the eventual value of m^(q) of (n - |mu|, mu)

    Walks n upwards from q|mu| until three consecutive values agree, then compares
    with the closed form when one is known. Below q|mu| the sequence can plateau
    early: for mu = (1), q = 6 it reads 1, 2, 2, 2 before settling on 3.

    Raises:
        NonConvergenceError: no stable run below max_n
        IntegrityError: stable value disagrees with the closed form
    """
    mu = Partition(mu)
    if mu.weight > max_size:
        raise PreconditionError(f"|mu|={mu.weight} is above the configured size {max_size}")

    n = max(mu.weight + mu.first_row, q * mu.weight)
    history = []
    while n <= max_n:
        history.append(multiplicity(first_row_shape(mu, n), q, engine=engine))
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            value = history[-1]
            expected = closed_form_constant(mu, q)
            if expected is not None and expected != value:
                raise IntegrityError(f"C_{mu}^{q} stabilised at {value}, closed form gives {expected}")
            logger.debug(f"C_{mu}^{q} = {value} (stable from n={n - 2})")
            return value
        n += 1

    raise NonConvergenceError(f"m^({q}) of (n-{mu.weight},{mu}) did not stabilise by n={max_n}: {history}")


def conjugate_vanishing_check(mu: Partition, q: int, n: int, engine: CharacterTableSlice = None) -> dict:
    """For odd q the conjugate of (n-|mu|, mu) should have multiplicity 0 once n is large."""
    shape = conjugate(first_row_shape(mu, n))
    value = multiplicity(shape, q, engine=engine)
    return {'mu': tuple(mu), 'q': q, 'n': n, 'partition': tuple(shape), 'm': value,
            'vanishes': value == 0, 'applies': q % 2 == 1}


# alpha and l

def order_dividing_class_sum(lam: Partition, q: int, engine: CharacterTableSlice = None) -> int:
    """sum over classes c with c^q = 1 of |c| chi_lambda(c)."""
    engine = engine or ENGINE
    n = sum(lam)
    return sum(
        class_size(c) * engine.value(lam, c)
        for c in cycle_types_of(n, ceiling=n)
        if all(q % part == 0 for part in c)
    )


def alpha_char(lam: Partition, q: int, engine: CharacterTableSlice = None) -> Fraction:
    """alpha_chi^(q) = (sum_{pi^q=1} chi(pi)) / |Hom(C_q, S_n)|."""
    if q < 2:
        raise PreconditionError(f"alpha needs q >= 2, got {q}")
    n = sum(lam)
    return Fraction(order_dividing_class_sum(lam, q, engine=engine), hom_count_cyclic(q, n))


def alpha_discrepancy_audit(n: int, q: int, engine: CharacterTableSlice = None) -> dict:
    """
    alpha of (n-1,1) by definition next to the displayed closed form
    n |Hom(C_q, S_{n-1})| / |Hom(C_q, S_n)|, which lacks a -1.
    """
    if n < 2:
        raise PreconditionError(f"(n-1,1) needs n >= 2, got {n}")
    definition = alpha_char(Partition((n - 1, 1)), q, engine=engine)
    displayed = Fraction(n * hom_count_cyclic(q, n - 1), hom_count_cyclic(q, n))
    record = {
        'n': n, 'q': q,
        'definition': definition,
        'displayed': displayed,
        'difference': displayed - definition,
        'matches_with_minus_one': displayed - 1 == definition,
    }
    logger.info(f"alpha (n-1,1) n={n} q={q}: definition {definition}, displayed {displayed}")
    return record


def demuskin_coeff(lam: Partition, q: int, engine: CharacterTableSlice = None) -> Fraction:
    """l_chi^(q) = (1/n!) sum_c |c| chi(c) chi(c^q) / chi(1)."""
    if q < 1:
        raise PreconditionError(f"q must be positive, got {q}")
    engine = engine or ENGINE
    n = sum(lam)
    total = 0
    for c in cycle_types_of(n, ceiling=n):
        value = engine.value(lam, c)
        if value:
            total += class_size(c) * value * engine.value(lam, power_cycle_type(c, q))
    return Fraction(total, factorial(n) * engine.dimension(lam))


def demuskin_closed_form(lam: Partition, q: int):
    """Known values of l for (n-1,1), (n-2,2), (n-2,1,1); None otherwise."""
    parts = tuple(lam)
    n = sum(parts)
    if len(parts) >= 2 and parts[1:] == (1,):
        return Fraction(1, n - 1)
    if parts[1:] == (2,) and parts[0] >= 2:
        return Fraction(0) if q % 2 == 0 else Fraction(1, n * n - 3 * n)
    if parts[1:] == (1, 1) and parts[0] >= 1:
        numerator = 13 if q % 2 == 0 else 9
        return Fraction(numerator, 2 * (n * n - 3 * n + 2))
    return None


def multiplicity_records(n: int, q: int, engine: CharacterTableSlice = None,
                         with_alpha: bool = False) -> list:
    """One MultiplicityRecord per partition of n, canonical order."""
    records = []
    for lam in partitions_of(n, ceiling=max(n, load_settings().n_ceiling)):
        records.append(MultiplicityRecord(
            partition=lam,
            q=q,
            m=multiplicity(lam, q, engine=engine),
            l=demuskin_coeff(lam, q, engine=engine),
            alpha=alpha_char(lam, q, engine=engine) if with_alpha and q >= 2 else None,
        ))
    return records


# Reports

def root_number_ratio_report(q: int, deltas=(1, 2, 3, 4), ns=(10, 12, 14),
                             engine: CharacterTableSlice = None) -> list:
    """
    m Delta! / (chi_mu(1) Q_Delta(q)) for lambda = (n - Delta, mu) over a grid;
    tends to 1 for large Delta and n, so only the numbers are reported.
    """
    engine = engine or ENGINE
    rows = []
    for delta in deltas:
        for mu in partitions_of(delta, ceiling=delta):
            for n in ns:
                if n - delta < mu.first_row:
                    continue
                m = multiplicity(first_row_shape(mu, n), q, engine=engine)
                denominator = engine.dimension(mu) * q_poly(delta, q)
                ratio = Fraction(m * factorial(delta)) / denominator if denominator else None
                rows.append({'q': q, 'mu': tuple(mu), 'n': n, 'm': m, 'ratio': ratio})
    return rows


def multiplicity_bound_audit(n: int, q: int, epsilon: float = 0.1,
                             engine: CharacterTableSlice = None) -> dict:
    """Counts of m < chi(1)^{1 - 2/q + epsilon} over lambda |- n (asymptotic claim, report only)."""
    engine = engine or ENGINE
    exponent = 1 - mpmath.mpf(2) / q + mpmath.mpf(epsilon)
    holds = fails = 0
    for lam in partitions_of(n, ceiling=n):
        m = multiplicity(lam, q, engine=engine)
        if m < mpmath.power(engine.dimension(lam), exponent):
            holds += 1
        else:
            fails += 1
    return {'n': n, 'q': q, 'epsilon': epsilon, 'holds': holds, 'fails': fails}
