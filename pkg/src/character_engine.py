# Exact irreducible characters of S_n: hook formula, memoized Murnaghan-Nakayama,
# skew characters, character polynomials in the cycle counts s_1, s_2, ... and
# exhaustive audits of the character inequalities

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import sympy
from tqdm import tqdm

from src.partition_core import (
    Partition,
    CycleType,
    as_cycle_type,
    partitions_of,
    cycle_types_of,
    hook_grid,
    rim_hook_tuples,
    class_size,
    sq,
)
from src.utils import (
    setup_logger,
    factorial,
    falling_factorial,
    SizeMismatchError,
    PreconditionError,
    check_ceiling,
    load_settings,
)

logger = setup_logger('CharacterEngine')


def _divisors_up_to(q: int, n: int) -> list:
    return [t for t in sympy.divisors(q) if t <= n]


class CharacterTableSlice:
    """
    Memoized character values chi_lambda(c) and degrees chi_lambda(1)

    Keys are plain tuples: (partition parts, remaining cycle lengths in
    decreasing order). Two threads may compute the same key; both write
    the same integer.
    """

    def __init__(self, use_cache: bool = True):
        self.use_cache = use_cache
        self._values = {}
        self._dims = {}
        self._skew = {}
        self._order_sums = {}
        self.stats = {'hits': 0, 'misses': 0}

    def clear(self):
        self._values.clear()
        self._dims.clear()
        self._skew.clear()
        self._order_sums.clear()
        self.stats = {'hits': 0, 'misses': 0}

    def cache_size(self) -> int:
        return len(self._values) + len(self._dims) + len(self._skew) + len(self._order_sums)

    # Degrees

    def dimension(self, lam) -> int:
        parts = tuple(lam)
        if self.use_cache and parts in self._dims:
            return self._dims[parts]
        value = factorial(sum(parts)) // hook_grid(Partition._trusted(parts)).product()
        if self.use_cache:
            self._dims[parts] = value
        return value

    # Murnaghan-Nakayama

    # Validate sizes and enter the recursion with cycles in decreasing order
    def value(self, lam, c) -> int:
        parts = tuple(lam)
        cycles = tuple(sorted(c, reverse=True))
        if sum(parts) != sum(cycles):
            raise SizeMismatchError(f"|lambda|={sum(parts)} but |c|={sum(cycles)}")
        return self._mn(parts, cycles)

    # chi_parts on the class with these cycles, one rim hook per step
    def _mn(self, parts: tuple, cycles: tuple) -> int:
        # Only fixed points left: the value is the degree
        if not cycles or cycles[0] == 1:
            return self.dimension(parts)

        # Memo lookup
        key = (parts, cycles)
        if self.use_cache:
            cached = self._values.get(key)
            if cached is not None:
                self.stats['hits'] += 1
                return cached
            self.stats['misses'] += 1

        # Remove the largest cycle first
        k, rest = cycles[0], cycles[1:]
        total = 0
        # Each removable k-rim hook contributes (-1)^leg times the smaller shape
        for remaining, leg in rim_hook_tuples(parts, k):
            term = self._mn(remaining, rest)
            total += -term if leg % 2 else term

        # Store
        if self.use_cache:
            self._values[key] = total
        return total

    def skew_value(self, outer, inner, c) -> int:
        """chi_{outer/inner}(c) by removing rim hooks that keep the shape above inner."""
        outer, inner = tuple(outer), tuple(inner)
        cycles = tuple(sorted(c, reverse=True))
        if sum(outer) - sum(inner) != sum(cycles):
            raise SizeMismatchError(
                f"|outer/inner|={sum(outer) - sum(inner)} but |c|={sum(cycles)}"
            )
        if not _contains(outer, inner):
            return 0
        return self._skew_mn(outer, inner, cycles)

    # Same recursion, stopping at the inner shape
    def _skew_mn(self, outer: tuple, inner: tuple, cycles: tuple) -> int:
        # Nothing left to remove: the skew shape must be empty
        if not cycles:
            return 1 if outer == inner else 0
        # Empty inner shape is the ordinary character
        if not inner:
            return self._mn(outer, cycles)

        key = (outer, inner, cycles)
        if self.use_cache and key in self._skew:
            return self._skew[key]

        k, rest = cycles[0], cycles[1:]
        total = 0
        for remaining, leg in rim_hook_tuples(outer, k):
            # Hooks that cut into the inner shape are not allowed
            if not _contains(remaining, inner):
                continue
            term = self._skew_mn(remaining, inner, rest)
            total += -term if leg % 2 else term

        if self.use_cache:
            self._skew[key] = total
        return total

    def order_dividing_sum(self, lam, q: int) -> int:
        """
        Sum of chi_lambda(pi) over pi in S_n with pi^q = 1

        Recursion: A(lam) = sum_{t | q} (n-1)!/(n-t)! sum_tau (-1)^leg A(lam - tau)
        over rim hooks tau of size t, with A(empty) = 1.
        """
        if q < 1:
            raise PreconditionError(f"q must be positive, got {q}")
        return self._order_sum(tuple(lam), q)

    # A(parts) for one q, memoized per (parts, q)
    def _order_sum(self, parts: tuple, q: int) -> int:
        # A(empty) = 1
        if not parts:
            return 1
        key = (parts, q)
        if self.use_cache and key in self._order_sums:
            return self._order_sums[key]

        n = sum(parts)
        total = 0
        # The cycle through point n has some length t dividing q
        for t in _divisors_up_to(q, n):
            # Signed sum over rim hooks of size t
            inner = 0
            for remaining, leg in rim_hook_tuples(parts, t):
                term = self._order_sum(remaining, q)
                inner += -term if leg % 2 else term
            # (n-1)!/(n-t)! ways to fill the rest of that cycle
            total += falling_factorial(n - 1, t - 1) * inner

        if self.use_cache:
            self._order_sums[key] = total
        return total


def _contains(outer: tuple, inner: tuple) -> bool:
    if len(inner) > len(outer):
        return False
    return all(outer[i] >= inner[i] for i in range(len(inner)))


# Shared engine for module-level calls
ENGINE = CharacterTableSlice()


def dimension(lam: Partition) -> int:
    """chi_lambda(1) = n! / prod of hook lengths."""
    return ENGINE.dimension(lam)


def character_value(lam: Partition, c: CycleType) -> int:
    return ENGINE.value(lam, c)


def skew_character_value(outer: Partition, inner: Partition, c: CycleType) -> int:
    return ENGINE.skew_value(outer, inner, c)


def order_dividing_sum(lam: Partition, q: int) -> int:
    return ENGINE.order_dividing_sum(lam, q)


def character_table(n: int, classes: list = None, engine: CharacterTableSlice = None,
                    ceiling: int = None) -> list:
    """
    Rows (partition, class, value) for every lambda of n and every class in classes

    Args:
        n: degree of the symmetric group
        classes: cycle types to evaluate on (default: all of them)
        engine: character cache to use (default: the shared one)

    Returns:
        list of (Partition, CycleType, int) in partition-major canonical order
    """
    engine = engine or ENGINE
    lams = partitions_of(n, ceiling=ceiling)
    classes = classes if classes is not None else cycle_types_of(n, ceiling=ceiling)
    rows = []
    for lam in lams:
        for c in classes:
            rows.append((lam, c, engine.value(lam, c)))
    return rows


def q_regular_classes(n: int, q: int, ceiling: int = None) -> list:
    """Classes c with c^q = 1, i.e. every cycle length divides q."""
    return [c for c in cycle_types_of(n, ceiling=ceiling) if all(q % part == 0 for part in c)]


# Character polynomials

@dataclass(frozen=True)
class CharacterPolynomial:
    """
    Polynomial P_mu in s_1..s_m with chi_{(n-|mu|, mu)}(pi) = P_mu(s_1(pi), ..., s_m(pi))
    once n >= 2|mu| + mu_1.
    """
    mu: Partition
    symbols: tuple
    poly: sympy.Poly

    @property
    def threshold(self) -> int:
        return 2 * self.mu.weight + self.mu.first_row

    @property
    def expr(self):
        return self.poly.as_expr()

    def evaluate(self, c: CycleType) -> Fraction:
        c = as_cycle_type(c)
        substitution = {sym: sympy.Integer(c.multiplicity(i)) for i, sym in enumerate(self.symbols, start=1)}
        value = sympy.Rational(self.expr.xreplace(substitution))
        return Fraction(int(value.p), int(value.q))

    def coefficients(self) -> dict:
        """Monomial exponent tuple -> exact coefficient."""
        return {
            monom: Fraction(int(coeff.p), int(coeff.q))
            for monom, coeff in zip(self.poly.monoms(), self.poly.coeffs())
        }

    def weighted_degree(self) -> int:
        """Degree when s_d carries weight d."""
        return max(
            (sum(d * e for d, e in enumerate(monom, start=1)) for monom in self.poly.monoms()),
            default=0,
        )


def _binomial_poly(symbol, k: int):
    # C(s, k) as a polynomial in s
    expr = sympy.Integer(1)
    for r in range(k):
        expr *= (symbol - r)
    return expr / sympy.factorial(k)


def character_polynomial(mu: Partition, engine: CharacterTableSlice = None) -> CharacterPolynomial:
    """
    Build P_mu by signed rim-hook counts

    chi_lambda(pi) = sum_{j=0..||mu||} (-1)^j sum_{c |- |mu|-j} chi_{mu/(1^j)}(c) prod_i C(s_i(pi), c_i)

    where c_i is the number of parts of c equal to i.
    """
    engine = engine or ENGINE
    mu = mu if isinstance(mu, Partition) else Partition(mu)
    size = mu.weight
    symbols = sympy.symbols(f"s1:{max(size, 1) + 1}")

    expr = sympy.Integer(0)
    for j in range(0, mu.norm + 1):
        inner = (1,) * j
        for c in cycle_types_of(size - j, ceiling=max(size, 1)):
            coeff = engine.skew_value(tuple(mu), inner, tuple(c))
            if coeff == 0:
                continue
            term = sympy.Integer(-coeff if j % 2 else coeff)
            for length, count in c.multiplicities().items():
                term *= _binomial_poly(symbols[length - 1], count)
            expr += term

    poly = sympy.Poly(sympy.expand(expr), *symbols, domain='QQ')
    logger.debug(f"character polynomial for mu={mu}: {poly.as_expr()}")
    return CharacterPolynomial(mu=mu, symbols=tuple(symbols), poly=poly)


# Inequality audits

def _binom(n: int, k: int) -> int:
    return math.comb(n, k) if 0 <= k <= n else 0


def _tally(report: dict, name: str, holds: bool, assertable: bool):
    entry = report['checks'].setdefault(name, {'holds': 0, 'fails': 0, 'assertable': assertable})
    entry['holds' if holds else 'fails'] += 1


def audit_character_bounds(n: int, engine: CharacterTableSlice = None, ceiling: int = None,
                           show_progress: bool = False) -> dict:
    """
    Evaluate the character inequalities for every lambda |- n and class c

    Checks marked assertable carry no size proviso and must show zero failures;
    the rest are reported only.

    Returns:
        {'n': n, 'pairs': count, 'checks': {name: {'holds', 'fails', 'assertable'}}}
    """
    # Avoid the import cycle: mixing times live in random_walks
    from src.random_walks import mixing_time_combinatorial

    if n < 2:
        raise PreconditionError(f"audit_character_bounds needs n >= 2, got {n}")
    ceiling = load_settings().n_ceiling if ceiling is None else ceiling
    check_ceiling(n, ceiling, 'audit_character_bounds')

    engine = engine or ENGINE
    lams = partitions_of(n, ceiling=ceiling)
    classes = cycle_types_of(n, ceiling=ceiling)
    identity = classes[-1]
    report = {'n': n, 'pairs': 0, 'checks': {}}

    t_c = {c: mixing_time_combinatorial(c) for c in classes if not c.is_identity}
    log_n = mpmath.log(n)

    for lam in tqdm(lams, desc=f"Auditing characters of S_{n}", disable=not show_progress):
        degree = engine.dimension(lam)
        s = sq(lam)
        rest = lam.without_first_row()
        rest_degree = engine.dimension(rest)
        delta = lam.delta

        # Degree bounds, one per partition
        lower = Fraction(_binom(n, s * s) * s ** (s * s) * factorial(s * s), n ** (s * s))
        _tally(report, 'squaredegree', degree >= lower, assertable=True)
        if 2 * lam.first_row >= n:
            _tally(report, 'chi1lower_ii', degree >= _binom(lam.first_row, delta) * rest_degree, assertable=True)
        if lam.norm <= lam.first_row and 4 * lam.first_row <= 3 * n:
            _tally(report, 'chi1lower_i', degree ** 8 >= 2 ** n, assertable=False)

        for c in classes:
            report['pairs'] += 1
            value = abs(engine.value(lam, c))
            cycles = c.cycle_count
            f = c.fixed_points

            _tally(report, 'squarevalue', value <= (2 * s) ** cycles, assertable=True)

            bound_one = rest_degree * sum(
                _binom(f, a) * _binom(cycles - f, b)
                for a in range(delta + 1) for b in range((delta - a) // 2 + 1)
            )
            _tally(report, 'large_l1_fixed_points', value <= bound_one, assertable=True)

            # |chi| <= n max_nu (2 sqrt(delta))^nu C(c, nu), squared to stay in integers
            holds = any(
                value * value <= n * n * (4 * delta) ** nu * _binom(cycles, nu) ** 2
                for nu in range(delta + 1)
            )
            _tally(report, 'large_l1_cycles', holds, assertable=True)

            if c != identity and value > 0 and degree > 1:
                exponent = 1 - (1 - 1 / log_n) / (6 * t_c[c])
                holds = mpmath.log(value) <= exponent * mpmath.log(degree)
                _tally(report, 'mixing_exponent', bool(holds), assertable=False)

    failures = [name for name, entry in report['checks'].items() if entry['assertable'] and entry['fails']]
    if failures:
        logger.error(f"n={n}: assertable character bounds failed: {failures}")
    else:
        logger.info(f"n={n}: {report['pairs']} (lambda, c) pairs audited, assertable bounds hold")
    return report
