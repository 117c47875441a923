# Exact counting machinery for S_n: |Hom(C_q, S_n)|, constrained counts N(n,q,s),
# cycle-moment sums with their recursions and polynomials, Stirling numbers and Q_n

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import sympy

from src.partition_core import cycle_types_of, class_size
from src.utils import (
    setup_logger,
    factorial,
    falling_factorial,
    PreconditionError,
    IntegrityError,
    UsageError,
)

logger = setup_logger('SymStatistics')


def proper_divisors(q: int) -> list:
    """Divisors t of q with t < q."""
    return [t for t in sympy.divisors(q) if t < q]


# |Hom(C_q, S_n)|

@dataclass(frozen=True)
class HomSequence:
    q: int
    counts: tuple  # counts[n] = |Hom(C_q, S_n)|

    def __getitem__(self, n: int) -> int:
        return self.counts[n]

    def __len__(self) -> int:
        return len(self.counts)


_HOM_TABLES = {}


def hom_sequence(q: int, n_max: int) -> HomSequence:
    """
    h_0 = 1, h_n = sum_{t | q} (n-1)!/(n-t)! h_{n-t}

    Tables grow per q and are reused by later calls.
    """
    if q < 1:
        raise PreconditionError(f"q must be positive, got {q}")
    if n_max < 0:
        raise PreconditionError(f"n must be non-negative, got {n_max}")

    table = _HOM_TABLES.setdefault(q, [1])
    divisors = sympy.divisors(q)
    while len(table) <= n_max:
        n = len(table)
        table.append(sum(falling_factorial(n - 1, t - 1) * table[n - t] for t in divisors if t <= n))
    return HomSequence(q=q, counts=tuple(table[: n_max + 1]))


def hom_count_cyclic(q: int, n: int) -> int:
    """Number of pi in S_n with pi^q = 1."""
    return hom_sequence(q, n)[n]


# N(n, q, s)

def constrained_count(n: int, q: int, s: dict) -> int:
    """
    Number of pi in S_n with pi^q = 1 and exactly s_t cycles of length t for each t | q, t < q

    Args:
        n: degree
        q: exponent
        s: map t -> s_t over proper divisors of q (missing keys mean 0)

    Returns:
        n! / (((n-S)/q)! prod s_t! t^{s_t} q^{(n-S)/q}) with S = sum t s_t, or 0 when q does not divide n - S
    """
    if q < 1:
        raise PreconditionError(f"q must be positive, got {q}")
    for t, count in s.items():
        if q % t != 0 or t >= q:
            raise PreconditionError(f"s may only constrain proper divisors of q={q}, got t={t}")
        if count < 0:
            raise PreconditionError(f"s_{t} must be non-negative, got {count}")

    used = sum(t * count for t, count in s.items())
    if used > n or (n - used) % q != 0:
        return 0

    long_cycles = (n - used) // q
    denominator = factorial(long_cycles) * q ** long_cycles
    for t, count in s.items():
        denominator *= factorial(count) * t ** count
    return factorial(n) // denominator


def iter_cycle_constraints(n: int, q: int):
    """Every s-map with sum t s_t <= n over the proper divisors of q."""
    divisors = proper_divisors(q)

    def extend(index: int, budget: int, current: dict):
        if index == len(divisors):
            yield dict(current)
            return
        t = divisors[index]
        for count in range(budget // t + 1):
            current[t] = count
            yield from extend(index + 1, budget - t * count, current)
        del current[t]

    yield from extend(0, n, {})


def stat_upper_bound_report(q: int, n: int) -> dict:
    """
    Check N(n,q,s)/N(n,q) <= q^sigma(q) prod_{s_t > 2e n^{t/q}} (e n^{t/q} / (t s_t))^{s_t}
    for every admissible s. The inequality is asymptotic, so failures are counted, not raised.
    """
    if q < 2:
        raise PreconditionError(f"q must be at least 2, got {q}")
    total = hom_count_cyclic(q, n)
    log_sigma = int(sympy.divisor_sigma(q)) * mpmath.log(q)
    report = {'q': q, 'n': n, 'holds': 0, 'fails': 0, 'worst_log_margin': None}

    for s in iter_cycle_constraints(n, q):
        count = constrained_count(n, q, s)
        if count == 0:
            continue
        log_bound = log_sigma
        for t, s_t in s.items():
            if s_t > 2 * mpmath.e * mpmath.power(n, mpmath.mpf(t) / q):
                log_bound += s_t * (1 + mpmath.mpf(t) / q * mpmath.log(n) - mpmath.log(t * s_t))
        margin = log_bound - (mpmath.log(count) - mpmath.log(total))
        report['holds' if margin >= 0 else 'fails'] += 1
        if report['worst_log_margin'] is None or margin < report['worst_log_margin']:
            report['worst_log_margin'] = margin

    if report['fails']:
        logger.warning(f"statistics bound failed {report['fails']} times at q={q}, n={n} (asymptotic statement)")
    return report


# Moments

@dataclass(frozen=True)
class MomentSpec:
    """
    Exponents e_t for proper divisors t of q

    alternating: weight each permutation by prod_{t|q} (-1)^{(t-1) s_t}
    shifted: use (s_t + 1)^{e_t} in place of s_t^{e_t}
    """
    q: int
    exponents: tuple = ()  # sorted (t, e_t) pairs with e_t > 0
    alternating: bool = False
    shifted: bool = False

    def __post_init__(self):
        if self.q < 1:
            raise PreconditionError(f"q must be positive, got {self.q}")
        cleaned = {}
        for t, e in dict(self.exponents).items():
            if self.q % t != 0 or t >= self.q:
                raise PreconditionError(f"exponent index t={t} is not a proper divisor of q={self.q}")
            if e < 0:
                raise PreconditionError(f"e_{t} must be non-negative, got {e}")
            if e:
                cleaned[t] = e
        object.__setattr__(self, 'exponents', tuple(sorted(cleaned.items())))

    @classmethod
    def parse(cls, q: int, text: str, alternating: bool = False, shifted: bool = False) -> "MomentSpec":
        """'1:2,2:1' -> e_1 = 2, e_2 = 1."""
        pairs = []
        for chunk in (text or '').replace(' ', '').split(','):
            if not chunk:
                continue
            try:
                t, e = chunk.split(':')
                pairs.append((int(t), int(e)))
            except ValueError:
                raise UsageError(f"cannot read exponent {chunk!r}; expected t:e")
        return cls(q=q, exponents=tuple(pairs), alternating=alternating, shifted=shifted)

    def exponent(self, t: int) -> int:
        return dict(self.exponents).get(t, 0)

    @property
    def D(self) -> int:
        return sum(t * e for t, e in self.exponents)

    def sign(self, t: int) -> int:
        return -1 if self.alternating and t % 2 == 0 else 1

    def vector(self) -> tuple:
        # e_t for each proper divisor, in divisor order
        return tuple(self.exponent(t) for t in proper_divisors(self.q))


@lru_cache(maxsize=None)
def _plain_moment(q: int, exps: tuple, alternating: bool, n: int) -> int:
    # exps is indexed like proper_divisors(q); t = q carries exponent 0
    if n == 0:
        return 1 if not any(exps) else 0
    divisors = proper_divisors(q)
    total = 0
    for t in sympy.divisors(q):
        if t > n:
            continue
        weight = falling_factorial(n - 1, t - 1)
        if alternating and t % 2 == 0:
            weight = -weight
        if t == q:
            total += weight * _plain_moment(q, exps, alternating, n - t)
            continue
        index = divisors.index(t)
        e = exps[index]
        inner = 0
        for nu in range(e + 1):
            reduced = exps[:index] + (e - nu,) + exps[index + 1:]
            inner += math.comb(e, nu) * _plain_moment(q, reduced, alternating, n - t)
        total += weight * inner
    return total


def cycle_moment_sum(spec: MomentSpec, n: int) -> int:
    """
    Sum over pi^q = 1 of prod_t s_t(pi)^{e_t} (signed when alternating)

    Computed by deleting the cycle that contains n. Shifted moments expand
    (s+1)^e binomially into plain ones.
    """
    if n < 0:
        raise PreconditionError(f"n must be non-negative, got {n}")
    exps = spec.vector()
    if not spec.shifted:
        return _plain_moment(spec.q, exps, spec.alternating, n)

    total = 0
    for lowered in itertools.product(*(range(e + 1) for e in exps)):
        weight = math.prod(math.comb(e, f) for e, f in zip(exps, lowered))
        total += weight * _plain_moment(spec.q, tuple(lowered), spec.alternating, n)
    return total


@dataclass(frozen=True)
class CyclePolynomial:
    """P(z) with sum_n S(n) z^n/n! = P(z) exp(sum_{t|q} +-z^t/t)."""
    spec: MomentSpec
    coefficients: tuple  # exact Fractions, index = power of z

    @property
    def degree(self) -> int:
        nonzero = [i for i, c in enumerate(self.coefficients) if c]
        return nonzero[-1] if nonzero else 0

    @property
    def expr(self):
        z = sympy.Symbol('z')
        return sum(
            (sympy.Rational(c.numerator, c.denominator) * z ** i for i, c in enumerate(self.coefficients)),
            sympy.Integer(0),
        )

    def moment(self, n: int) -> Fraction:
        """Coefficient extraction: sum_nu alpha_nu n!/(n-nu)! B(n-nu), B the unweighted base count."""
        base = MomentSpec(q=self.spec.q, alternating=self.spec.alternating)
        return sum(
            (coeff * falling_factorial(n, nu) * cycle_moment_sum(base, n - nu)
             for nu, coeff in enumerate(self.coefficients) if nu <= n and coeff),
            Fraction(0),
        )


def _polynomial_coefficients(spec: MomentSpec) -> tuple:
    divisors = proper_divisors(spec.q)
    memo = {}

    def alpha(exps: tuple, d: int) -> Fraction:
        if d < 0:
            return Fraction(0)
        if d == 0:
            return Fraction(1) if spec.shifted or not any(exps) else Fraction(0)
        key = (exps, d)
        if key in memo:
            return memo[key]
        total = Fraction(0)
        for index, t in enumerate(divisors):
            e = exps[index]
            if e == 0 or t > d:
                continue
            inner = sum(
                (math.comb(e, nu) * alpha(exps[:index] + (e - nu,) + exps[index + 1:], d - t)
                 for nu in range(1, e + 1)),
                Fraction(0),
            )
            total += spec.sign(t) * inner
        memo[key] = total / d
        return memo[key]

    exps = spec.vector()
    return tuple(alpha(exps, d) for d in range(spec.D + 1))


def moment_polynomial(spec: MomentSpec) -> CyclePolynomial:
    if not spec.shifted and spec.exponents:
        logger.debug(f"plain moment polynomial for {spec}: constant term 0")
    return CyclePolynomial(spec=spec, coefficients=_polynomial_coefficients(spec))


def alpha_coefficients(spec: MomentSpec) -> list:
    """
    alpha^(0..D) with sum_{pi^q=1} prod s_t^{e_t} = sum_nu alpha^(nu) n!/(n-nu)! |Hom(C_q, S_{n-nu})|

    alpha^(d) = (1/d) sum_{t|q} sum_{nu=1}^{e_t} C(e_t, nu) alpha^(d-t)_{e - nu at t}
    """
    if spec.alternating:
        raise PreconditionError("alpha_coefficients is defined for the plain sign only")
    return list(_polynomial_coefficients(spec))


def touchard_product(spec: MomentSpec) -> tuple:
    """Closed form prod_t T_{e_t}(+-z^t/t); T_k(w) = sum_j S(k,j) w^j, or S(k+1,j+1) when shifted."""
    coefficients = [Fraction(1)]
    for t, e in spec.exponents:
        factor = [Fraction(0)] * (t * e + 1)
        for j in range(e + 1):
            weight = stirling2(e + 1, j + 1) if spec.shifted else stirling2(e, j)
            factor[t * j] = Fraction(weight * spec.sign(t) ** j, t ** j)
        product = [Fraction(0)] * (len(coefficients) + len(factor) - 1)
        for i, a in enumerate(coefficients):
            if a:
                for j, b in enumerate(factor):
                    product[i + j] += a * b
        coefficients = product
    return tuple(coefficients)


# Stirling numbers and Q_n

@lru_cache(maxsize=None)
def stirling2(n: int, m: int) -> int:
    """Set partitions of n elements into m blocks."""
    if n < 0 or m < 0:
        raise PreconditionError(f"stirling2 needs non-negative arguments, got ({n}, {m})")
    if n == m:
        return 1
    if m == 0 or m > n:
        return 0
    return m * stirling2(n - 1, m) + stirling2(n - 1, m - 1)


@lru_cache(maxsize=None)
def stirling1_unsigned(n: int, k: int) -> int:
    """Permutations of n points with exactly k cycles."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return (n - 1) * stirling1_unsigned(n - 1, k) + stirling1_unsigned(n - 1, k - 1)


def q_poly_coefficients(n: int) -> list:
    """[S(n, n - nu) for nu = 0..n-1]."""
    if n < 0:
        raise PreconditionError(f"n must be non-negative, got {n}")
    return [stirling2(n, n - nu) for nu in range(n)]


def q_poly(n: int, t) -> Fraction:
    """Q_n(t) = sum_{nu=0}^{n-1} S(n, n - nu) t^nu, exact for rational t."""
    t = Fraction(t)
    return sum((coeff * t ** nu for nu, coeff in enumerate(q_poly_coefficients(n))), Fraction(0))


# Cycle counts

@dataclass(frozen=True)
class CycleCountDistribution:
    n: int
    counts: tuple  # counts[j] = permutations with exactly j cycles
    tail_audit: tuple = field(default=())  # (k, tail, bound, holds)


def cycle_count_distribution(n: int) -> CycleCountDistribution:
    """
    Unsigned Stirling row of the first kind, with the tail audit
    #{pi : at least k cycles} <= n! (log n)^{k-1} / (k-1)!
    """
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    counts = tuple(stirling1_unsigned(n, j) for j in range(n + 1))
    if sum(counts) != factorial(n):
        raise IntegrityError(f"cycle counts of S_{n} do not sum to n!")

    audit = []
    log_n = mpmath.log(n)
    for k in range(1, n + 1):
        tail = sum(counts[k:])
        bound = factorial(n) * log_n ** (k - 1) / mpmath.factorial(k - 1)
        audit.append((k, tail, bound, bool(tail <= bound)))
    failures = [k for k, _, _, holds in audit if not holds]
    if failures:
        logger.warning(f"cycle tail bound fails at n={n} for k in {failures}")
    return CycleCountDistribution(n=n, counts=counts, tail_audit=tuple(audit))


def poisson_moment_check(d: int, k: int, n: int) -> Fraction:
    """(1/n!) sum_pi C(s_d(pi), k), checked against 1/(d^k k!) for k d <= n."""
    if d < 1 or k < 0:
        raise PreconditionError(f"need d >= 1 and k >= 0, got d={d}, k={k}")
    if k * d > n:
        raise PreconditionError(f"identity needs k*d <= n, got k={k}, d={d}, n={n}")

    total = sum(class_size(c) * math.comb(c.multiplicity(d), k) for c in cycle_types_of(n, ceiling=n))
    value = Fraction(total, factorial(n))
    expected = Fraction(1, d ** k * factorial(k))
    if value != expected:
        raise IntegrityError(f"binomial moment ({d},{k}) at n={n} is {value}, expected {expected}")
    return value
